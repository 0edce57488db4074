from __future__ import annotations

import numpy as np
import pytest

from cardinal.errors import ParamError
from cardinal.lymph_node import CellType, EffectorTCell
from cardinal.peer_interaction import (
    InteractionParams,
    PeerEffectorMessage,
    PeerResponseHistory,
    estimate_growth,
    merge_peer_messages,
    plan_migration,
    stage1_select,
    stage2_select,
    stage3_update,
    stage4_suppress,
    th1_boost_ctl,
)

CTL, TH1, TH2 = CellType.CTL, CellType.TH1, CellType.TH2
P = InteractionParams()


def eff(antigen, ctype, clones, hist=(0, 0), origin=None):
    return EffectorTCell(antigen, ctype, clones, origin=origin, clones_hist=hist)


def msg(antigen, ctype, clones=2, sender=1, receiver=0):
    return PeerEffectorMessage(eff(antigen, ctype, clones, origin=sender), sender, receiver, 0, 0)


class TestStage1:
    def test_split(self):
        sel, rest = stage1_select([eff("A", CTL, c) for c in (5, 3, 4)], 4)
        assert sorted(e.clones for e in sel) == [4, 5]
        assert [e.clones for e in rest] == [3]

    def test_empty(self):
        assert stage1_select([], 4) == ([], [])

    def test_all_below(self):
        local = [eff("A", CTL, 1), eff("B", TH2, 2)]
        assert stage1_select(local, 4) == ([], local)


class TestStage2:
    def test_peer_quorum(self):
        local = eff("A", CTL, 1)
        assert stage2_select([local], [msg("A", CTL), msg("A", CTL, sender=2)], 2) == [local]

    def test_type_must_match(self):
        local = eff("A", CTL, 1)
        assert stage2_select([local], [msg("A", TH2), msg("A", TH2, sender=2)], 2) == []

    def test_no_messages(self):
        assert stage2_select([eff("A", CTL, 1)], [], 1) == []


class TestGrowth:
    def test_differences(self):
        assert estimate_growth(PeerResponseHistory(3, 7), eff("A", CTL, 4, hist=(2, 4))) == (4, 2)

    def test_flat(self):
        assert estimate_growth(PeerResponseHistory(), eff("A", CTL, 4)) == (0, 0)

    def test_shrinking_outbreak(self):
        g_worm, _ = estimate_growth(PeerResponseHistory(5, 2), eff("A", CTL, 4))
        assert g_worm == -3

    def test_history_shift(self):
        h = PeerResponseHistory(3, 7)
        h.shift(9)
        assert (h.r_t2, h.r_t1) == (7, 9)


class TestStage3:
    def test_increase(self):
        (e,) = stage3_update([eff("A", CTL, 4, hist=(2, 4))], PeerResponseHistory(3, 7), P, 32)
        assert e.clones == 6

    def test_decrease(self):
        # g_worm = 1, g_clone = 2
        (e,) = stage3_update([eff("A", CTL, 4, hist=(2, 4))], PeerResponseHistory(3, 4), P, 32)
        assert e.clones == 3

    def test_tie_increases(self):
        (e,) = stage3_update([eff("A", CTL, 4)], PeerResponseHistory(), P, 32)
        assert e.clones == 6

    def test_cap(self):
        (e,) = stage3_update([eff("A", CTL, 31)], PeerResponseHistory(), P, 32)
        assert e.clones == 32

    def test_shrink_to_zero_drops(self):
        out = stage3_update([eff("A", CTL, 1, hist=(0, 5))], PeerResponseHistory(), P, 32)
        assert out == []


class TestStage4:
    def test_unmatched_is_suppressed_and_remembered(self):
        peers, memory = stage4_suppress([eff("B", CTL, 3, origin=1)], [], set(), P)
        assert peers[0].clones == 2 and memory == {"B"}

    def test_last_clone_leaves_no_memory(self):
        peers, memory = stage4_suppress([eff("B", CTL, 1, origin=1)], [], set(), P)
        assert peers[0].clones == 0 and memory == set()

    def test_matched_by_any_type_untouched(self):
        peers, memory = stage4_suppress([eff("A", CTL, 3, origin=1)], [eff("A", TH2, 1)], set(), P)
        assert peers[0].clones == 3 and memory == set()


class TestTh1Boost:
    def test_boost(self):
        local = th1_boost_ctl([eff("A", CTL, 4), eff("A", TH1, 6)], 0.5, 32)
        assert local[0].clones == 7

    def test_other_antigen(self):
        local = th1_boost_ctl([eff("A", CTL, 4), eff("B", TH1, 6)], 0.5, 32)
        assert local[0].clones == 4

    def test_floor(self):
        local = th1_boost_ctl([eff("A", CTL, 4), eff("A", TH1, 1)], 0.5, 32)
        assert local[0].clones == 4

    def test_cap(self):
        local = th1_boost_ctl([eff("A", CTL, 30), eff("A", TH1, 10)], 0.5, 32)
        assert local[0].clones == 32


class TestMerge:
    def test_strongest_wins_and_lowest_sender_breaks_ties(self):
        merged = merge_peer_messages(
            [msg("A", CTL, 3, sender=4), msg("A", CTL, 5, sender=7), msg("A", CTL, 5, sender=2)], 32
        )
        assert [(e.clones, e.origin) for e in merged] == [(5, 2)]

    def test_delivery_order_irrelevant(self):
        ms = [msg("A", CTL, 3, sender=4), msg("B", TH2, 2, sender=1), msg("A", CTL, 3, sender=1)]
        assert merge_peer_messages(ms, 32) == merge_peer_messages(ms[::-1], 32)


class TestMigration:
    def rng(self):
        return np.random.default_rng(0)

    def test_polls_min_of_clones_and_degree(self):
        resp, out = plan_migration([eff("A", CTL, 3)], [], [1, 2, 3, 4, 5], self.rng(), sender=0, step=9)
        assert len(out) == 3 and len({m.receiver for m in out}) == 3
        assert all(m.effector.clones == 3 and m.sent_at == 9 for m in out)
        assert [e.key for e in resp] == [("A", CTL)]

    def test_every_neighbour_once(self):
        _, out = plan_migration([eff("A", CTL, 10)], [], [1, 2, 3, 4], self.rng(), sender=0, step=0)
        assert sorted(m.receiver for m in out) == [1, 2, 3, 4]

    def test_th1_travels_but_does_not_respond(self):
        resp, out = plan_migration([eff("A", TH1, 5)], [], [1, 2, 3], self.rng(), sender=0, step=0)
        assert resp == []
        assert len(out) == 3 and all(m.effector.cell_type is TH1 for m in out)

    def test_active_response_count_attached(self):
        local = [eff("A", CTL, 2), eff("B", TH2, 1), eff("C", TH1, 2)]
        _, out = plan_migration(local, [], [1, 2], self.rng(), sender=0, step=0)
        assert {m.sender_active_responses for m in out} == {2}

    def test_forwarded_peer_capped_by_local_evidence(self):
        _, out = plan_migration(
            [eff("A", TH2, 2)], [eff("A", CTL, 9, origin=5)], [1, 2, 3, 4], self.rng(), sender=0, step=0
        )
        fwd = [m for m in out if m.effector.cell_type is CTL]
        assert len(fwd) == 2 and all(m.effector.clones == 2 for m in fwd)

    def test_isolated_host_sends_nothing(self):
        resp, out = plan_migration([eff("A", CTL, 3)], [], [], None, sender=0, step=0)
        assert out == [] and len(resp) == 1

    def test_message_json(self):
        row = msg("A", TH2, 2, sender=3, receiver=8).to_json()
        assert row == {"event": "message", "sender": 3, "receiver": 8, "antigen": "A",
                       "cell_type": "Th2", "clones": 2, "sender_active_responses": 0, "sent_at": 0}


@pytest.mark.parametrize("kw", [{"q_local": 0}, {"delta_down": 1.0}, {"th1_fraction": 0.0}, {"delta_up": 0}])
def test_bad_params(kw):
    with pytest.raises(ParamError):
        InteractionParams(**kw)
