"""JSON-lines session transcripts for replay testing.

One JSON object per line. A ``config`` line per participant comes first::

    {"kind": "config", "peer": 0, "peers": [1, 2], "display_name": "peer-0",
     "placement": {"radian_deg": 62.3, "radius_m": 0.57, "n_remote": 2} | null}

followed by the events fed to each participant, in processing order::

    {"kind": "event", "seq": 17, "t_ms": 40.2, "peer": 1,
     "event": {"type": "inbound", "from": 0, "msg": {"type": "Join", ...}}}

Event types: ``join``, ``set_mode`` (``mode``), ``leave``, ``tick``
(``now_ms``), ``send_media`` (``msg``), ``inbound`` (``from``, ``msg``).
"""

from __future__ import annotations

import json
from typing import Iterable

from ..errors import InvalidInput
from .state import (
    Event,
    Inbound,
    JoinCmd,
    LeaveCmd,
    SendMedia,
    SessionState,
    SetModeCmd,
    Tick,
    step,
)
from .wire import Mode, PlacementUpdate, message_from_dict, message_to_dict


def event_to_dict(event: Event) -> dict:
    if isinstance(event, Inbound):
        return {"type": "inbound", "from": event.sender, "msg": message_to_dict(event.msg)}
    if isinstance(event, JoinCmd):
        return {"type": "join"}
    if isinstance(event, LeaveCmd):
        return {"type": "leave"}
    if isinstance(event, SetModeCmd):
        return {"type": "set_mode", "mode": Mode(event.mode).slug}
    if isinstance(event, Tick):
        return {"type": "tick", "now_ms": event.now_ms}
    if isinstance(event, SendMedia):
        return {"type": "send_media", "msg": message_to_dict(event.msg)}
    raise InvalidInput(f"cannot serialize event {event!r}")


def event_from_dict(d: dict) -> Event:
    kind = d.get("type")
    if kind == "inbound":
        return Inbound(int(d["from"]), message_from_dict(d["msg"]))
    if kind == "join":
        return JoinCmd()
    if kind == "leave":
        return LeaveCmd()
    if kind == "set_mode":
        return SetModeCmd(Mode.from_slug(d["mode"]))
    if kind == "tick":
        return Tick(int(d["now_ms"]))
    if kind == "send_media":
        return SendMedia(message_from_dict(d["msg"]))
    raise InvalidInput(f"unknown transcript event type {kind!r}")


class TranscriptWriter:
    def __init__(self) -> None:
        self.lines: list[str] = []
        self._seq = 0

    def config(self, state: SessionState) -> None:
        p = state.placement
        self.lines.append(
            json.dumps(
                {
                    "kind": "config",
                    "peer": state.local_id,
                    "peers": sorted(state.configured),
                    "display_name": state.display_name,
                    "placement": None
                    if p is None
                    else {"radian_deg": p.radian_deg, "radius_m": p.radius_m, "n_remote": p.n_remote},
                },
                sort_keys=True,
            )
        )

    def event(self, peer: int, t_ms: float, event: Event) -> None:
        self.lines.append(
            json.dumps(
                {
                    "kind": "event",
                    "seq": self._seq,
                    "t_ms": t_ms,
                    "peer": peer,
                    "event": event_to_dict(event),
                },
                sort_keys=True,
            )
        )
        self._seq += 1

    def text(self) -> str:
        return "".join(line + "\n" for line in self.lines)


def replay(lines: Iterable[str]) -> dict[int, SessionState]:
    """Rebuild every participant's final state from a transcript."""
    states: dict[int, SessionState] = {}
    for n, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"transcript line {n}: {exc}") from None
        if rec.get("kind") == "config":
            pl = rec.get("placement")
            states[rec["peer"]] = SessionState.create(
                rec["peer"],
                rec["peers"],
                rec.get("display_name", ""),
                None if pl is None else PlacementUpdate(pl["radian_deg"], pl["radius_m"], pl["n_remote"]),
            )
        elif rec.get("kind") == "event":
            peer = rec["peer"]
            if peer not in states:
                raise InvalidInput(f"transcript line {n}: event for unconfigured peer {peer}")
            states[peer], _ = step(states[peer], event_from_dict(rec["event"]))
        else:
            raise InvalidInput(f"transcript line {n}: unknown record kind {rec.get('kind')!r}")
    return states
