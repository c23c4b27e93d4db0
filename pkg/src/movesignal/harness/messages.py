"""Message-level view of a trace."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field


@dataclass
class MessageRecord:
    """One queued message and when each of its bits was handled.

    ``recipient`` is the engine index; ``recipient_label`` is the name the
    sender used for it.  ``decoded_at`` maps each observer to the instants at
    which it decoded each bit (an observer may have decoded only a prefix).
    """

    msg_id: int
    sender: int
    recipient: int
    recipient_label: int
    bits: tuple
    enqueued_at: int
    encode_start: list = field(default_factory=list)
    encode_done: list = field(default_factory=list)
    decoded_at: dict = field(default_factory=dict)
    decoded_bits: dict = field(default_factory=dict)

    @property
    def delivered(self) -> bool:
        return self.decoded_bits.get(self.recipient) == list(self.bits)


def message_records(trace) -> list:
    """Rebuild every message's life cycle from the event stream."""
    msgs = []
    by_sender = defaultdict(list)  # sender -> [(msg, bit index)] in outbox order
    by_pair = defaultdict(list)    # (sender, recipient) -> [(msg, bit index)]
    started = defaultdict(int)
    done = defaultdict(int)
    read = defaultdict(int)        # (observer, sender, recipient) -> bits read
    for rec in trace.records:
        for e in rec.events:
            tag = e[0]
            if tag == "enqueue":
                _, s, r, bits, msg_id = e[:5]
                label = e[5] if len(e) > 5 else None
                m = MessageRecord(msg_id, s, r, label, tuple(int(b) for b in bits), rec.t)
                msgs.append(m)
                slots = [(m, k) for k in range(len(m.bits))]
                by_sender[s].extend(slots)
                by_pair[(s, r)].extend(slots)
            elif tag == "encode":
                s, stage = e[1], e[4]
                counter = started if stage == "start" else done
                k = counter[s]
                counter[s] = k + 1
                if k < len(by_sender[s]):
                    m, _ = by_sender[s][k]
                    (m.encode_start if stage == "start" else m.encode_done).append(rec.t)
            elif tag == "decode":
                _, o, s, r, b = e
                k = read[(o, s, r)]
                read[(o, s, r)] = k + 1
                if k < len(by_pair[(s, r)]):
                    m, _ = by_pair[(s, r)][k]
                    m.decoded_at.setdefault(o, []).append(rec.t)
                    m.decoded_bits.setdefault(o, []).append(b)
    return msgs


def delivery_stats(trace) -> dict:
    msgs = message_records(trace)
    return {
        "messages": len(msgs),
        "messages_delivered": sum(m.delivered for m in msgs),
        "bits_sent": sum(len(m.bits) for m in msgs),
        "bits_encoded": sum(len(m.encode_done) for m in msgs),
        "bits_delivered": sum(len(m.decoded_bits.get(m.recipient, [])) for m in msgs),
    }
