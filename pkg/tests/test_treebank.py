import random

import pytest
from hypothesis import given, strategies as st

from treeprune import (
    ConlluParseError,
    DepSentence,
    DepToken,
    ParseWarnings,
    TreeStructureError,
    parse_conllu,
)

from conftest import make_sentence, random_sentence


def block(*rows):
    return "\n".join("\t".join(str(c) for c in r) for r in rows) + "\n"


MINIMAL = block((1, "Hello", "hello", "INTJ", "_", "_", 0, "root", "_", "_"))


class TestParsing:
    def test_minimal_block(self):
        sents = parse_conllu(MINIMAL)
        assert len(sents) == 1
        sent = sents[0]
        assert len(sent) == 1
        assert sent.tokens[0].head == 0
        assert sent.tokens[0].form == "Hello"
        assert sent.text == "Hello"

    def test_self_loop_head_rejected(self):
        text = block(
            (1, "a", "_", "NOUN", "_", "_", 0, "root", "_", "_"),
            (2, "b", "_", "NOUN", "_", "_", 2, "dep", "_", "_"),
        )
        with pytest.raises(TreeStructureError):
            parse_conllu(text)

    def test_three_sentences_with_comments(self):
        blocks = []
        for k in range(3):
            blocks.append(
                f"# sent_id = s{k}\n"
                + block(
                    (1, "she", "_", "PRON", "_", "_", 2, "nsubj", "_", "_"),
                    (2, "runs", "_", "VERB", "_", "_", 0, "root", "_", "_"),
                )
            )
        text = "\n".join(blocks)
        # independent count: non-empty groups of non-comment token lines
        expected = sum(
            1
            for chunk in text.split("\n\n")
            if any(line and not line.startswith("#") for line in chunk.splitlines())
        )
        sents = parse_conllu(text)
        assert len(sents) == expected == 3

    def test_text_comment_used(self):
        text = "# text = She runs!\n" + block(
            (1, "She", "_", "PRON", "_", "_", 2, "nsubj", "_", "_"),
            (2, "runs", "_", "VERB", "_", "_", 0, "root", "_", "_"),
        )
        assert parse_conllu(text)[0].text == "She runs!"

    def test_multiword_and_empty_nodes_skipped(self):
        text = (
            block(("1-2", "isn't", "_", "_", "_", "_", "_", "_", "_", "_"))
            + block(
                (1, "is", "_", "AUX", "_", "_", 0, "root", "_", "_"),
                ("1.1", "ghost", "_", "NOUN", "_", "_", "_", "_", "_", "_"),
                (2, "not", "_", "PART", "_", "_", 1, "advmod", "_", "_"),
            )
        )
        warnings = ParseWarnings()
        sents = parse_conllu(text, warnings)
        assert len(sents) == 1
        assert len(sents[0]) == 2
        assert warnings.multiword_ranges == 1
        assert warnings.empty_nodes == 1

    def test_unknown_upos_mapped_to_unk(self):
        text = block((1, "xin", "_", "Nb", "_", "_", 0, "root", "_", "_"))
        warnings = ParseWarnings()
        sent = parse_conllu(text, warnings)[0]
        assert sent.tokens[0].upos == "UNK"
        assert warnings.unknown_upos == 1

    def test_malformed_line_carries_line_number(self):
        text = MINIMAL + "\n1\tonly\tthree\n"
        with pytest.raises(ConlluParseError) as err:
            parse_conllu(text)
        assert err.value.line_no == 3
        assert "line 3" in str(err.value)

    def test_bad_head_value(self):
        text = block((1, "a", "_", "NOUN", "_", "_", "x", "root", "_", "_"))
        with pytest.raises(ConlluParseError):
            parse_conllu(text)

    def test_cycle_rejected(self):
        text = block(
            (1, "a", "_", "NOUN", "_", "_", 0, "root", "_", "_"),
            (2, "b", "_", "NOUN", "_", "_", 3, "dep", "_", "_"),
            (3, "c", "_", "NOUN", "_", "_", 2, "dep", "_", "_"),
        )
        with pytest.raises(TreeStructureError) as err:
            parse_conllu(text)
        assert "sentence 1" in str(err.value)

    @pytest.mark.parametrize("heads", [(1, 2), (0, 0)])
    def test_exactly_one_root_required(self, heads):
        text = block(
            (1, "a", "_", "NOUN", "_", "_", heads[0], "dep", "_", "_"),
            (2, "b", "_", "NOUN", "_", "_", heads[1], "dep", "_", "_"),
        )
        with pytest.raises(TreeStructureError):
            parse_conllu(text)

    def test_noncontiguous_indices_rejected(self):
        text = block(
            (1, "a", "_", "NOUN", "_", "_", 0, "root", "_", "_"),
            (3, "b", "_", "NOUN", "_", "_", 1, "dep", "_", "_"),
        )
        with pytest.raises(TreeStructureError):
            parse_conllu(text)


class TestNavigation:
    def test_children_of_chain(self):
        sent = make_sentence(
            [("a", "NOUN", 0, "root"), ("b", "NOUN", 1, "dep"), ("c", "NOUN", 2, "dep")]
        )
        assert sent.children(1) == (2,)
        assert sent.children(2) == (3,)
        assert sent.children(3) == ()

    def test_children_of_star(self):
        sent = make_sentence(
            [("r", "VERB", 0, "root")] + [(w, "NOUN", 1, "obj") for w in "bcd"]
        )
        assert sent.children(1) == (2, 3, 4)

    def test_children_bounds(self):
        sent = parse_conllu(MINIMAL)[0]
        with pytest.raises(IndexError):
            sent.children(0)
        with pytest.raises(IndexError):
            sent.children(2)

    def test_depth_of_root_and_chain(self):
        chain = make_sentence(
            [("a", "NOUN", 0, "root"), ("b", "NOUN", 1, "dep"),
             ("c", "NOUN", 2, "dep"), ("d", "NOUN", 3, "dep")]
        )
        assert chain.depth(1) == 1
        assert chain.depth(4) == 4
        assert chain.tree_depth() == 4

    def test_depth_matches_parent_walk_oracle(self):
        rng = random.Random(99)
        for _ in range(25):
            sent = random_sentence(rng, 10)
            for i in range(1, 11):
                steps, j = 1, i
                while sent.tokens[j - 1].head != 0:
                    j = sent.tokens[j - 1].head
                    steps += 1
                assert sent.depth(i) == steps

    def test_root_subject_basic(self):
        sent = make_sentence([("she", "PRON", 2, "nsubj"), ("runs", "VERB", 0, "root")])
        assert sent.root_subject() == 1

    def test_root_subject_absent_for_imperative(self):
        sent = make_sentence([("run", "VERB", 0, "root"), ("home", "ADV", 1, "advmod")])
        assert sent.root_subject() is None

    def test_root_subject_prefix_match_and_lowest_index(self):
        sent = make_sentence(
            [("cats", "NOUN", 3, "nsubj"), ("dogs", "NOUN", 3, "nsubj:pass"),
             ("run", "VERB", 0, "root")]
        )
        assert sent.root_subject() == 1

    def test_max_depth_of(self):
        chain = make_sentence(
            [("a", "NOUN", 0, "root")] + [("x", "NOUN", i, "dep") for i in range(1, 5)]
        )
        assert chain.max_depth_of([1]) == 1
        assert chain.max_depth_of(range(1, 6)) == 5
        with pytest.raises(ValueError):
            chain.max_depth_of([])

    def test_max_depth_of_random_subsets(self):
        rng = random.Random(5)
        for _ in range(20):
            sent = random_sentence(rng, 9)
            subset = rng.sample(range(1, 10), rng.randint(1, 9))
            assert sent.max_depth_of(subset) == max(sent.depth(i) for i in subset)


@st.composite
def dep_sentences(draw):
    n = draw(st.integers(min_value=1, max_value=10))
    order = draw(st.permutations(list(range(1, n + 1))))
    heads = {order[0]: 0}
    for pos in range(1, n):
        heads[order[pos]] = order[draw(st.integers(0, pos - 1))]
    rows = []
    for i in range(1, n + 1):
        upos = draw(st.sampled_from(["NOUN", "VERB", "ADJ", "DET", "ADP"]))
        form = draw(st.sampled_from(["blue", "fish", "ran", "over", "the", "x1"]))
        rows.append((form, upos, heads[i], "root" if heads[i] == 0 else "dep"))
    return make_sentence(rows)


class TestProperties:
    @given(dep_sentences())
    def test_children_partition_tokens(self, sent):
        seen = [sent.root]
        for i in range(1, len(sent) + 1):
            seen.extend(sent.children(i))
        assert sorted(seen) == list(range(1, len(sent) + 1))

    @given(dep_sentences())
    def test_depth_recurrence(self, sent):
        for t in sent.tokens:
            if t.head:
                assert sent.depth(t.index) == sent.depth(t.head) + 1
            else:
                assert sent.depth(t.index) == 1

    @given(dep_sentences())
    def test_conllu_round_trip(self, sent):
        again = parse_conllu(sent.to_conllu())
        assert len(again) == 1
        assert again[0] == sent


def test_dep_token_invariants():
    with pytest.raises(TreeStructureError):
        DepToken(index=0, form="x", upos="NOUN", head=1, deprel="dep")
    with pytest.raises(TreeStructureError):
        DepToken(index=1, form="x", upos="NOUN", head=-1, deprel="dep")
    with pytest.raises(TreeStructureError):
        DepToken(index=1, form="x", upos="NOPE", head=0, deprel="root")


def test_sentence_requires_tokens():
    with pytest.raises(TreeStructureError):
        DepSentence(tokens=(), text="")
