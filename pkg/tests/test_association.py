"""Detection-to-tube association: memory seeding, matching, gaps, EMA."""
import itertools

import numpy as np
import pytest

from tubekit.association import (AssociationConfig, Detection, FrameDetections,
                                 TubeMemory, init_memory, run_association,
                                 associate_step, top_by_confidence)
from tubekit.errors import ValidationError
from tubekit.geometry import Box

BOX = Box(0.4, 0.4, 0.6, 0.6)


def det(score: float, feature, box: Box = BOX) -> Detection:
    return Detection(box=box, score=score, feature=np.asarray(feature, dtype=float))


def basis(i: int, dim: int) -> np.ndarray:
    v = np.zeros(dim)
    v[i] = 1.0
    return v


class TestValidation:
    def test_detection_score_range(self):
        with pytest.raises(ValidationError):
            det(1.5, [1.0, 0.0])

    def test_detection_zero_feature(self):
        with pytest.raises(ValidationError):
            det(0.5, [0.0, 0.0])

    def test_frame_needs_detections(self):
        with pytest.raises(ValidationError):
            FrameDetections(t=0, detections=[])

    def test_frame_rejects_mixed_dims(self):
        with pytest.raises(ValidationError):
            FrameDetections(t=0, detections=[det(0.5, [1.0, 0.0]),
                                             det(0.5, [1.0, 0.0, 0.0])])

    def test_config_ranges(self):
        with pytest.raises(ValidationError):
            AssociationConfig(n_q=0)
        with pytest.raises(ValidationError):
            AssociationConfig(alpha=1.5)

    def test_memory_rejects_zero_row(self):
        with pytest.raises(ValidationError):
            TubeMemory(np.array([[1.0, 0.0], [0.0, 0.0]]))

    def test_memory_is_read_only_copy(self):
        src = np.array([[1.0, 0.0], [0.0, 1.0]])
        mem = TubeMemory(src)
        src[0, 0] = 5.0
        assert mem.vectors[0, 0] == 1.0
        with pytest.raises(ValueError):
            mem.vectors[0, 0] = 2.0


class TestTopByConfidence:
    def test_sorted_by_score(self):
        frame = FrameDetections(t=0, detections=[
            det(0.2, [1.0, 0.0]), det(0.9, [0.0, 1.0]), det(0.5, [1.0, 1.0])])
        assert top_by_confidence(frame, 2) == [1, 2]

    def test_score_tie_keeps_lower_index(self):
        frame = FrameDetections(t=0, detections=[
            det(0.5, [1.0, 0.0]), det(0.5, [0.0, 1.0])])
        assert top_by_confidence(frame, 2) == [0, 1]

    def test_k_larger_than_frame(self):
        frame = FrameDetections(t=0, detections=[det(0.5, [1.0, 0.0])])
        assert top_by_confidence(frame, 4) == [0]


class TestInitMemory:
    def test_direct_seeding(self):
        frame = FrameDetections(t=0, detections=[
            det(0.9, basis(0, 3)), det(0.8, basis(1, 3)), det(0.7, basis(2, 3))])
        memory, tubes = init_memory(frame, AssociationConfig(n_q=3))
        assert np.array_equal(memory.vectors, np.eye(3))
        assert [t.records[0].det for t in tubes] == [0, 1, 2]

    def test_seeding_follows_confidence_order(self):
        frame = FrameDetections(t=0, detections=[
            det(0.1, basis(0, 3)), det(0.9, basis(1, 3)), det(0.5, basis(2, 3))])
        memory, tubes = init_memory(frame, AssociationConfig(n_q=3))
        assert [t.records[0].det for t in tubes] == [1, 2, 0]
        assert np.array_equal(memory.vectors[0], basis(1, 3))

    def test_cycling_when_short(self):
        frame = FrameDetections(t=0, detections=[
            det(0.9, basis(0, 2)), det(0.8, basis(1, 2))])
        memory, tubes = init_memory(frame, AssociationConfig(n_q=5))
        assert [t.records[0].det for t in tubes] == [0, 1, 0, 1, 0]
        assert memory.n_q == 5


class TestAssociateStep:
    def test_permutation_recovery_exhaustive(self):
        # Orthogonal features make the optimum unique, so every permutation
        # of the detections must be matched back to its seeding slot.
        n = 5
        cfg = AssociationConfig(n_q=n, alpha=0.5)
        seed_frame = FrameDetections(t=0, detections=[
            det(0.9, basis(i, n)) for i in range(n)])
        for perm in itertools.permutations(range(n)):
            memory, tubes = init_memory(seed_frame, cfg)
            frame = FrameDetections(t=1, detections=[
                det(0.9, basis(perm[j], n)) for j in range(n)])
            associate_step(memory, tubes, frame, cfg)
            for slot, tube in enumerate(tubes):
                assert perm[tube.records[1].det] == slot

    def test_ema_blend_is_bit_exact(self):
        cfg = AssociationConfig(n_q=1, alpha=0.3)
        seed = FrameDetections(t=0, detections=[det(0.9, [1.0, 2.0, 3.0])])
        memory, tubes = init_memory(seed, cfg)
        nxt = FrameDetections(t=1, detections=[det(0.9, [4.0, 5.0, 6.0])])
        memory = associate_step(memory, tubes, nxt, cfg)
        expected = 0.7 * np.array([1.0, 2.0, 3.0]) + 0.3 * np.array([4.0, 5.0, 6.0])
        assert np.array_equal(memory.vectors[0], expected)

    def test_alpha_one_memory_equals_frame(self):
        cfg = AssociationConfig(n_q=2, alpha=1.0)
        seed = FrameDetections(t=0, detections=[det(0.9, basis(0, 2)),
                                                det(0.8, basis(1, 2))])
        memory, tubes = init_memory(seed, cfg)
        f1 = np.array([0.9, 0.1])
        f2 = np.array([0.2, 0.8])
        frame = FrameDetections(t=1, detections=[det(0.9, f1), det(0.8, f2)])
        memory = associate_step(memory, tubes, frame, cfg)
        assert np.array_equal(memory.vectors[0], f1)
        assert np.array_equal(memory.vectors[1], f2)

    def test_alpha_zero_memory_frozen(self):
        cfg = AssociationConfig(n_q=2, alpha=0.0)
        seed = FrameDetections(t=0, detections=[det(0.9, basis(0, 2)),
                                                det(0.8, basis(1, 2))])
        memory, tubes = init_memory(seed, cfg)
        frame = FrameDetections(t=1, detections=[det(0.9, [0.9, 0.1]),
                                                 det(0.8, [0.2, 0.8])])
        memory = associate_step(memory, tubes, frame, cfg)
        assert np.array_equal(memory.vectors, np.eye(2))
        assert all(len(t.records) == 2 for t in tubes)

    def test_pool_truncation_keeps_original_indices(self):
        # n_q = 1 with three detections: only the most confident enters the
        # pool, and the stored det index refers to the full frame list.
        cfg = AssociationConfig(n_q=1, alpha=0.5)
        seed = FrameDetections(t=0, detections=[det(0.9, [1.0, 0.0])])
        memory, tubes = init_memory(seed, cfg)
        frame = FrameDetections(t=1, detections=[
            det(0.1, [1.0, 0.0]), det(0.2, [1.0, 0.0]), det(0.95, [0.8, 0.2])])
        associate_step(memory, tubes, frame, cfg)
        assert tubes[0].records[1].det == 2

    def test_gap_rule(self):
        # Two slots, one detection in the pool: the unmatched slot repeats its
        # box at confidence 0 and its memory row survives untouched.
        cfg = AssociationConfig(n_q=2, alpha=0.5)
        box0 = Box(0.1, 0.1, 0.3, 0.3)
        box1 = Box(0.6, 0.6, 0.8, 0.8)
        seed = FrameDetections(t=0, detections=[det(0.9, basis(0, 2), box0),
                                                det(0.8, basis(1, 2), box1)])
        memory, tubes = init_memory(seed, cfg)
        frame = FrameDetections(t=1, detections=[det(0.9, [1.0, 0.05],
                                                     Box(0.2, 0.2, 0.4, 0.4))])
        memory = associate_step(memory, tubes, frame, cfg)
        gap = tubes[1].records[1]
        assert gap.det is None
        assert gap.score == 0.0
        assert gap.box == box1
        assert np.array_equal(gap.feature, basis(1, 2))
        assert np.array_equal(memory.vectors[1], basis(1, 2))
        assert tubes[0].records[1].det == 0

    def test_dim_mismatch_rejected(self):
        cfg = AssociationConfig(n_q=1, alpha=0.5)
        seed = FrameDetections(t=0, detections=[det(0.9, [1.0, 0.0])])
        memory, tubes = init_memory(seed, cfg)
        frame = FrameDetections(t=1, detections=[det(0.9, [1.0, 0.0, 0.0])])
        with pytest.raises(ValidationError):
            associate_step(memory, tubes, frame, cfg)


def _random_clip(seed: int, frames: int = 8, per_frame: int = 4, dim: int = 6):
    rng = np.random.default_rng(seed)
    out = []
    for t in range(frames):
        dets = []
        for _ in range(per_frame):
            x1 = rng.uniform(0.0, 0.7)
            y1 = rng.uniform(0.0, 0.7)
            box = Box(x1, y1, x1 + 0.2, y1 + 0.2)
            feat = rng.normal(size=dim)
            feat[0] += 2.0
            dets.append(det(float(rng.uniform(0.1, 1.0)), feat, box))
        out.append(FrameDetections(t=t, detections=dets))
    return out


class TestRunAssociation:
    def test_every_tube_spans_every_frame(self):
        frames = _random_clip(1)
        tubes = run_association(frames, AssociationConfig(n_q=6, alpha=0.2))
        assert len(tubes) == 6
        for tube in tubes:
            assert tube.timestamps() == list(range(8))

    def test_rejects_non_increasing_timestamps(self):
        frames = _random_clip(2)
        frames[3] = FrameDetections(t=2, detections=frames[3].detections)
        with pytest.raises(ValidationError):
            run_association(frames)

    def test_rejects_empty_clip(self):
        with pytest.raises(ValidationError):
            run_association([])

    def test_deterministic(self):
        frames = _random_clip(3)
        a = run_association(frames, AssociationConfig(n_q=5, alpha=0.1))
        b = run_association(frames, AssociationConfig(n_q=5, alpha=0.1))
        for ta, tb in zip(a, b):
            assert ta.slot_id == tb.slot_id
            for ra, rb in zip(ta.records, tb.records):
                assert ra.t == rb.t and ra.det == rb.det
                assert ra.box == rb.box and ra.score == rb.score
                assert np.array_equal(ra.feature, rb.feature)

    def test_memory_stays_in_convex_hull(self):
        # With features embedded in the simplex of seen vectors, every EMA
        # iterate keeps coordinates within the componentwise min/max envelope.
        frames = _random_clip(4, frames=12)
        lo = np.min([d.feature for f in frames for d in f.detections], axis=0)
        hi = np.max([d.feature for f in frames for d in f.detections], axis=0)
        cfg = AssociationConfig(n_q=4, alpha=0.25)
        memory, tubes = init_memory(frames[0], cfg)
        for frame in frames[1:]:
            memory = associate_step(memory, tubes, frame, cfg)
            assert np.all(memory.vectors >= lo - 1e-12)
            assert np.all(memory.vectors <= hi + 1e-12)
