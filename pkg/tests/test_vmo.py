import numpy as np
import pytest

from improvae import vmo

from conftest import ClassicalFactorOracle


def symbol_features(text):
    """Map a string to one 1-D feature row per character (exact-match metric)."""
    return np.array([[float(ord(c))] for c in text])


def build_discrete(text, theta=0.5):
    return vmo.build_oracle(symbol_features(text), "discrete", theta)


class TestCosineDistance:
    def test_parallel_is_zero(self):
        assert vmo.cosine_distance([1, 2], [2, 4]) == pytest.approx(0.0)

    def test_orthogonal_is_one(self):
        assert vmo.cosine_distance([1, 0], [0, 3]) == pytest.approx(1.0)

    def test_opposite_is_two(self):
        assert vmo.cosine_distance([1, 1], [-1, -1]) == pytest.approx(2.0)

    def test_zero_vector_is_one(self):
        assert vmo.cosine_distance([0, 0], [5, 1]) == 1.0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            vmo.cosine_distance([1, 2], [1, 2, 3])


class TestBuildOracle:
    def test_abab(self):
        oracle = build_discrete("abab")
        assert oracle.sfx.tolist() == [-1, 0, 0, 1, 2]
        assert oracle.lrs.tolist() == [0, 0, 0, 1, 2]

    def test_all_distinct_symbols(self):
        oracle = build_discrete("abcd")
        assert oracle.sfx.tolist() == [-1, 0, 0, 0, 0]
        assert oracle.lrs.tolist() == [0, 0, 0, 0, 0]

    def test_constant_sequence(self):
        oracle = build_discrete("aaaaa")
        assert oracle.sfx.tolist() == [-1, 0, 1, 2, 3, 4]
        assert oracle.lrs.tolist() == [0, 0, 1, 2, 3, 4]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            vmo.build_oracle(np.zeros((0, 2)), "euclidean", 0.1)

    def test_unknown_distance_rejected(self):
        with pytest.raises(ValueError):
            vmo.build_oracle(np.ones((2, 2)), "chebyshev", 0.1)

    def test_tonnetz_requires_chroma_width(self):
        with pytest.raises(ValueError):
            vmo.build_oracle(np.ones((3, 5)), "tonnetz", 0.1)

    def test_matches_classical_construction_on_random_strings(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 40))
            text = "".join(rng.choice(list("abc"), size=n))
            oracle = build_discrete(text)
            ref = ClassicalFactorOracle.from_string(text)
            assert oracle.sfx.tolist() == ref.sfx
            assert oracle.lrs.tolist() == ref.lrs
            for state in range(n + 1):
                assert set(oracle.transitions[state]) == set(ref.transitions[state].values())

    def test_theta_zero_euclidean_reduces_to_exact_match(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 30))
            symbols = rng.integers(0, 3, size=n)
            oracle = vmo.build_oracle(symbols[:, None].astype(float), "euclidean", 0.0)
            ref = ClassicalFactorOracle.from_string(symbols.tolist())
            assert oracle.sfx.tolist() == ref.sfx
            assert oracle.lrs.tolist() == ref.lrs

    def test_lrs_certifies_aligned_similarity(self, rng):
        # every suffix link with lrs l must align l theta-similar frame pairs
        for theta in (0.3, 0.8, 1.5):
            features = rng.normal(size=(60, 3))
            oracle = vmo.build_oracle(features, "euclidean", theta)
            for k in range(1, oracle.n + 1):
                s = int(oracle.sfx[k])
                l = int(oracle.lrs[k])
                assert 0 <= l <= min(k - 1, s)
                for j in range(l):
                    assert oracle.distance(k - 1 - j, s - 1 - j) <= theta + 1e-12

    def test_transitions_within_theta(self, rng):
        features = rng.normal(size=(40, 2))
        oracle = vmo.build_oracle(features, "euclidean", 0.9)
        for state in range(oracle.n + 1):
            for target in oracle.transitions[state]:
                assert 1 <= target <= oracle.n


class TestComprorParse:
    def test_constant_sequence(self):
        blocks = vmo.compror_parse(build_discrete("aaaa"))
        assert blocks == [("lit", 0), ("copy", 1, 3)]

    def test_all_distinct(self):
        blocks = vmo.compror_parse(build_discrete("abcd"))
        assert blocks == [("lit", 0), ("lit", 1), ("lit", 2), ("lit", 3)]

    def test_parse_covers_sequence_exactly(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 50))
            text = "".join(rng.choice(list("ab"), size=n))
            pos = 0
            for block in vmo.compror_parse(build_discrete(text)):
                assert block[1] == pos
                pos += 1 if block[0] == "lit" else block[2]
            assert pos == n

    def test_copy_blocks_repeat_earlier_material(self, rng):
        for _ in range(30):
            text = "".join(rng.choice(list("abc"), size=40))
            for block in vmo.compror_parse(build_discrete(text)):
                if block[0] != "copy":
                    continue
                _, start, length = block
                assert length >= 2
                # the copied factor must occur somewhere before `start`
                factor = text[start : start + length]
                assert factor in text[: start + length - 1]


class TestInformationRate:
    def test_constant_sequence_hand_computed(self):
        profile = vmo.ir_of_oracle(build_discrete("aaaa"))
        # parse: literal at 0, then a 3-frame copy at 1-based position 2
        amortized = (np.log2(3) + np.log2(4)) / 3
        expected = [0.0,
                    max(0.0, np.log2(3) - amortized),
                    max(0.0, np.log2(4) - amortized),
                    max(0.0, np.log2(5) - amortized)]
        assert np.allclose(profile.per_frame, expected)
        assert profile.total == pytest.approx(sum(expected))

    def test_all_distinct_is_zero(self):
        profile = vmo.ir_of_oracle(build_discrete("abcdefg"))
        assert profile.total == 0.0
        assert np.all(profile.per_frame == 0)

    def test_nonnegative_everywhere(self, rng):
        for _ in range(30):
            text = "".join(rng.choice(list("ab"), size=int(rng.integers(1, 60))))
            profile = vmo.ir_of_oracle(build_discrete(text))
            assert np.all(profile.per_frame >= 0)

    def test_periodic_beats_shuffled(self):
        pattern = list("abcd")
        periodic = "".join(pattern * 10)
        for seed in range(10):
            shuffled = list(periodic)
            np.random.default_rng(seed).shuffle(shuffled)
            ir_periodic = vmo.ir_of_oracle(build_discrete(periodic)).total
            ir_shuffled = vmo.ir_of_oracle(build_discrete("".join(shuffled))).total
            assert ir_periodic > ir_shuffled

    def test_profile_length_matches_sequence(self, rng):
        features = rng.normal(size=(25, 2))
        profile = vmo.ir_of_oracle(vmo.build_oracle(features, "euclidean", 0.5))
        assert profile.per_frame.shape == (25,)


class TestThresholdSearch:
    def test_constant_data_single_candidate(self):
        features = np.ones((6, 2))
        curve, oracle = vmo.threshold_search(features, "euclidean")
        assert curve.theta_star == 0.0
        assert oracle.theta == 0.0
        assert len(curve.points) == 1

    def test_tie_goes_to_smallest_theta(self):
        # constant data yields identical IR at every threshold
        features = np.ones((6, 2))
        curve, oracle = vmo.threshold_search(features, "euclidean",
                                             thetas=[0.2, 0.7, 1.3])
        totals = [t for _, t in curve.points]
        assert totals[0] == totals[1] == totals[2]
        assert curve.theta_star == 0.2
        assert oracle.theta == 0.2

    def test_selected_oracle_attains_curve_maximum(self, rng):
        features = rng.normal(size=(30, 2))
        curve, oracle = vmo.threshold_search(features, "euclidean")
        best = max(total for _, total in curve.points)
        assert vmo.ir_of_oracle(oracle).total == pytest.approx(best)
        assert oracle.theta == curve.theta_star

    def test_explicit_grid_separates_structure_from_noise(self, rng):
        # two tight clusters far apart; a small theta groups within-cluster
        # repeats while theta=0 sees every frame as novel
        a = np.array([0.0, 0.0])
        b = np.array([100.0, 0.0])
        frames = np.array([a, b, a + rng.normal(scale=0.01, size=2),
                           b + rng.normal(scale=0.01, size=2)] * 5)
        curve, oracle = vmo.threshold_search(frames, "euclidean",
                                             thetas=[0.0, 0.1])
        assert curve.theta_star == 0.1
        assert dict(curve.points)[0.1] > dict(curve.points)[0.0]

    def test_exhaustive_covers_all_distinct_distances(self):
        features = np.array([[0.0], [1.0], [3.0]])
        curve, _ = vmo.threshold_search(features, "euclidean", exhaustive=True)
        assert sorted(theta for theta, _ in curve.points) == [1.0, 2.0, 3.0]

    def test_empty_candidate_list_rejected(self):
        with pytest.raises(ValueError):
            vmo.threshold_search(np.ones((3, 2)), "euclidean", thetas=[])


class TestFindMotifs:
    def test_planted_motif_recovered(self):
        # pattern [10, 20, 30] planted twice among distinct fillers
        features = np.array([[10.0], [20.0], [30.0], [1.0],
                             [10.0], [20.0], [30.0], [2.0]])
        oracle = vmo.build_oracle(features, "euclidean", 0.5)
        motifs = vmo.find_motifs(oracle, min_length=3, min_occurrences=2)
        assert len(motifs) == 1
        assert motifs[0].length == 3
        assert motifs[0].occurrences == [3, 7]

    def test_three_occurrences(self):
        text = "xyzaxyzbxyzc"
        motifs = vmo.find_motifs(build_discrete(text), 3, 3)
        assert any(m.length == 3 and m.occurrences == [3, 7, 11] for m in motifs)

    def test_no_motif_when_none_repeats(self):
        assert vmo.find_motifs(build_discrete("abcdefg"), 2, 2) == []

    def test_min_occurrences_filters(self):
        features = np.array([[10.0], [20.0], [30.0], [1.0],
                             [10.0], [20.0], [30.0], [2.0]])
        oracle = vmo.build_oracle(features, "euclidean", 0.5)
        assert vmo.find_motifs(oracle, 3, 3) == []

    def test_bad_parameters_rejected(self):
        oracle = build_discrete("abab")
        with pytest.raises(ValueError):
            vmo.find_motifs(oracle, 0, 2)
        with pytest.raises(ValueError):
            vmo.find_motifs(oracle, 1, 1)

    def test_occurrences_pairwise_similar_over_motif_length(self, rng):
        # soundness on noisy repeated data: every reported occurrence pair
        # must align within theta over the full motif length
        for _ in range(20):
            base = rng.normal(size=(4, 2))
            seq = []
            for _ in range(6):
                if rng.random() < 0.6:
                    seq.extend(base + rng.normal(scale=0.02, size=(4, 2)))
                else:
                    seq.extend(rng.normal(scale=5.0, size=(2, 2)))
            oracle = vmo.build_oracle(np.array(seq), "euclidean", 0.15)
            for motif in vmo.find_motifs(oracle, 2, 2):
                occ = motif.occurrences
                assert occ == sorted(occ)
                assert len(set(occ)) == len(occ)
                for x in occ:
                    assert motif.length <= x <= oracle.n
                    for y in occ:
                        for j in range(motif.length):
                            assert oracle.distance(x - 1 - j, y - 1 - j) \
                                <= oracle.theta + 1e-12

    def test_containment_pruning_keeps_longest(self):
        # "abcab cabc" style: length-3 motif subsumes its length-2 suffix pairs
        text = "abcxabcyabcz"
        motifs = vmo.find_motifs(build_discrete(text), 2, 2)
        lengths = sorted(m.length for m in motifs)
        assert 3 in lengths
        for motif in motifs:
            if motif.length == 3:
                assert motif.occurrences == [3, 7, 11]
