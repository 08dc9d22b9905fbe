"""Simulated message fabric with per-kind accounting and an event log.

Delivery is instantaneous and lossless. Every message costs one unit,
including a broadcast that reaches all ``n`` nodes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

COORDINATOR = "C"


class MessageKind(enum.Enum):
    ProtocolUpload = "ProtocolUpload"
    ProtocolRoundBroadcast = "ProtocolRoundBroadcast"
    FilterBroadcast = "FilterBroadcast"
    InitiationBroadcast = "InitiationBroadcast"
    DirectDown = "DirectDown"

    @property
    def is_broadcast(self) -> bool:
        return self in _BROADCASTS


_BROADCASTS = frozenset(
    {
        MessageKind.ProtocolRoundBroadcast,
        MessageKind.FilterBroadcast,
        MessageKind.InitiationBroadcast,
    }
)


@dataclass
class MessageTally:
    counts: dict[MessageKind, int] = field(
        default_factory=lambda: {kind: 0 for kind in MessageKind}
    )

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __getitem__(self, kind: MessageKind) -> int:
        return self.counts[kind]

    def __sub__(self, other: "MessageTally") -> "MessageTally":
        return MessageTally({k: self.counts[k] - other.counts[k] for k in MessageKind})

    def __add__(self, other: "MessageTally") -> "MessageTally":
        return MessageTally({k: self.counts[k] + other.counts[k] for k in MessageKind})

    def copy(self) -> "MessageTally":
        return MessageTally(dict(self.counts))

    @property
    def uploads(self) -> int:
        return self.counts[MessageKind.ProtocolUpload]

    @property
    def broadcasts(self) -> int:
        return sum(n for k, n in self.counts.items() if k.is_broadcast)

    def as_dict(self) -> dict[str, int]:
        out = {kind.value: n for kind, n in self.counts.items()}
        out["total"] = self.total
        return out


@dataclass(frozen=True)
class EventLogEntry:
    t: int
    kind: MessageKind
    sender: int | str
    info: str = ""

    def __str__(self):
        return f"t={self.t} kind={self.kind.value} from={self.sender} info={self.info}"


class Fabric:
    """Message sink for one simulation run.

    The owner advances ``t`` before each time step. With ``keep_log=False``
    only the counters are maintained, which is what the protocol benchmark
    uses for large trial counts.
    """

    def __init__(self, keep_log: bool = True):
        self.t = 0
        self.keep_log = keep_log
        self._tally = MessageTally()
        self._log: list[EventLogEntry] = []

    def record_upload(self, node: int, payload="") -> None:
        self._record(MessageKind.ProtocolUpload, node, payload)

    def record_broadcast(self, kind: MessageKind, payload="") -> None:
        if not kind.is_broadcast:
            raise ValueError(f"{kind.value} is not a broadcast kind")
        self._record(kind, COORDINATOR, payload)

    def record_direct(self, node: int, payload="") -> None:
        self._record(MessageKind.DirectDown, COORDINATOR, f"to={node} {payload}".rstrip())

    def _record(self, kind, sender, payload):
        self._tally.counts[kind] += 1
        if self.keep_log:
            self._log.append(EventLogEntry(self.t, kind, sender, str(payload)))

    def tally_snapshot(self) -> MessageTally:
        return self._tally.copy()

    def export_event_log(self) -> list[EventLogEntry]:
        return list(self._log)

    def event_log_text(self) -> str:
        return "".join(f"{entry}\n" for entry in self._log)
