import pytest

from topkmon.transport import Fabric, MessageKind


def test_fresh_fabric_is_empty():
    f = Fabric()
    tally = f.tally_snapshot()
    assert tally.total == 0
    assert all(v == 0 for v in tally.counts.values())
    assert f.export_event_log() == []


def test_upload_counts():
    f = Fabric()
    f.record_upload(3, "v=5")
    assert f.tally_snapshot().total == 1
    for i in range(4):
        f.record_upload(i + 1)
    assert f.tally_snapshot()[MessageKind.ProtocolUpload] == 5


def test_broadcast_costs_one_regardless_of_audience():
    f = Fabric()
    f.record_broadcast(MessageKind.FilterBroadcast, "M=7")
    tally = f.tally_snapshot()
    assert tally[MessageKind.FilterBroadcast] == 1
    assert tally.total == 1


def test_interleaved_messages():
    f = Fabric()
    f.record_upload(1)
    f.record_broadcast(MessageKind.ProtocolRoundBroadcast)
    assert f.tally_snapshot().total == 2


def test_non_broadcast_kind_rejected():
    with pytest.raises(ValueError):
        Fabric().record_broadcast(MessageKind.ProtocolUpload)
    with pytest.raises(ValueError):
        Fabric().record_broadcast(MessageKind.DirectDown)


def test_log_matches_tally_and_format():
    f = Fabric()
    f.t = 4
    f.record_upload(2, "max r=0 v=9")
    f.record_broadcast(MessageKind.InitiationBroadcast, "max N=8")
    f.record_direct(5, "hello")
    log = f.export_event_log()
    assert len(log) == f.tally_snapshot().total == 3
    lines = f.event_log_text().splitlines()
    assert lines[0] == "t=4 kind=ProtocolUpload from=2 info=max r=0 v=9"
    assert lines[1] == "t=4 kind=InitiationBroadcast from=C info=max N=8"
    assert lines[2].startswith("t=4 kind=DirectDown from=C info=to=5")


def test_snapshots_are_copies():
    f = Fabric()
    snap = f.tally_snapshot()
    f.record_upload(1)
    assert snap.total == 0
    log = f.export_event_log()
    f.record_upload(2)
    assert len(log) == 1


def test_tally_arithmetic():
    f = Fabric()
    f.record_upload(1)
    before = f.tally_snapshot()
    f.record_broadcast(MessageKind.FilterBroadcast)
    f.record_upload(2)
    delta = f.tally_snapshot() - before
    assert delta.total == 2 and delta.uploads == 1 and delta.broadcasts == 1
    assert delta.as_dict()["total"] == 2
