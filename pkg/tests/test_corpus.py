from srres.corpus import (
    CorpusSpec,
    capped_five_vertex,
    downset_families,
    family_digest,
    full_corpus,
    random_complexes,
    small_complexes,
)
from srres.simplicial import subsets_of


def _downward_closed(faces):
    fs = set(faces)
    return all(sub in fs for f in fs for sub in subsets_of(f))


def test_family_counts_match_free_distributive_lattice_sizes():
    # number of downward-closed families on m labeled vertices (including the
    # void family and the empty complex)
    assert [sum(1 for _ in downset_families(m)) for m in range(5)] == [2, 3, 6, 20, 168]


def test_five_vertex_family_count():
    assert sum(1 for _ in downset_families(5)) == 7581


def test_families_are_downward_closed_and_distinct():
    fams = list(downset_families(4))
    assert len(set(fams)) == len(fams)
    for faces in fams:
        assert _downward_closed(faces)


def test_small_complexes_covers_all_up_to_four_vertices():
    out = small_complexes(4)
    assert len(out) == 2 + 3 + 6 + 20 + 168
    assert sorted({K.m for K in out}) == [0, 1, 2, 3, 4]


def test_capped_five_vertex_is_a_deterministic_prefix():
    ten = capped_five_vertex(10)
    twenty = capped_five_vertex(20)
    assert len(ten) == 10 and len(twenty) == 20
    assert [K.faces for K in ten] == [K.faces for K in twenty[:10]]
    digests = [family_digest(5, tuple(sorted(K.faces))) for K in twenty]
    assert digests == sorted(digests)
    assert all(K.m == 5 for K in twenty)


def test_random_complexes_are_seeded_and_bounded():
    a = random_complexes(6, 12, seed=7)
    b = random_complexes(6, 12, seed=7)
    c = random_complexes(6, 12, seed=8)
    assert [K.faces for K in a] == [K.faces for K in b]
    assert [K.faces for K in a] != [K.faces for K in c]
    for K in a:
        assert K.m == 6
        assert _downward_closed(K.faces)
        assert max(f.bit_count() for f in K.faces) <= 4  # maxdim 3


def test_full_corpus_composition():
    corpus = full_corpus(CorpusSpec())
    hist = {}
    for K in corpus:
        hist[K.m] = hist.get(K.m, 0) + 1
    assert hist == {0: 2, 1: 3, 2: 6, 3: 20, 4: 168, 5: 90, 6: 55, 7: 50}
    # at least a hundred random complexes on 6-7 vertices
    assert hist[6] + hist[7] >= 100
    again = full_corpus(CorpusSpec())
    assert [(K.m, K.faces) for K in corpus] == [(K.m, K.faces) for K in again]
