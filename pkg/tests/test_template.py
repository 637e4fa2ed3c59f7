import json

import pytest

from bayesvis import cafe_study, tasks
from bayesvis.errors import TemplateError


def task_doc(task_id, vis="boxplot", query_id=""):
    return {
        "kind": "task",
        "spec": {
            "id": task_id,
            "query_id": query_id or task_id,
            "visualisation": vis,
            "answer_input": {"type": "slider", "min": 0, "max": 1,
                             "step": 0.01},
            "query_meta": {"observability": "observable",
                           "quantity": "confidence"},
            "objective": {"kind": "kl", "variable": "x", "threshold": 0.5},
            "model_ref": "blob",
        },
    }


class TestParsing:
    def test_single_task(self):
        t = tasks.parse_template(json.dumps({"root": task_doc("a")}))
        leaves = t.leaves()
        assert len(leaves) == 1
        assert leaves[0].id == "a"

    def test_bare_node_accepted(self):
        t = tasks.parse_template(task_doc("a"))
        assert t.leaves()[0].id == "a"

    def test_bad_json(self):
        with pytest.raises(TemplateError):
            tasks.parse_template("{not json")

    def test_unknown_kind(self):
        with pytest.raises(TemplateError):
            tasks.parse_template({"kind": "mystery"})

    def test_empty_tasklist(self):
        with pytest.raises(TemplateError):
            tasks.parse_template({"kind": "tasklist", "children": []})

    def test_duplicate_ids(self):
        doc = {"kind": "tasklist", "ordered": True,
               "children": [task_doc("a"), task_doc("a")]}
        with pytest.raises(TemplateError):
            tasks.parse_template(doc)

    def test_invalid_leaf_reports_path(self):
        bad = task_doc("b")
        bad["spec"]["visualisation"] = "pie_chart"
        doc = {"kind": "tasklist",
               "children": [task_doc("a"),
                            {"kind": "tasklist", "children": [bad]}]}
        with pytest.raises(TemplateError) as err:
            tasks.parse_template(doc)
        assert err.value.path == (1, 0)

    def test_choose_k_out_of_range(self):
        doc = {"kind": "tasklist", "ordered": False, "choose_k": 3,
               "children": [task_doc("a"), task_doc("b")]}
        with pytest.raises(TemplateError):
            tasks.parse_template(doc)


class TestMergeList:
    def _doc(self):
        common = {
            "answer_input": {"type": "slider", "min": 0, "max": 1,
                             "step": 0.01},
            "query_meta": {"observability": "latent",
                           "quantity": "confidence"},
            "objective": {"kind": "kl", "variable": "x", "threshold": 0.5},
            "model_ref": "blob",
        }
        return {
            "kind": "mergelist",
            "left": [{"id": "q1", "query_id": "q1", **common},
                     {"id": "q2", "query_id": "q2", **common}],
            "right": [{"id": "boxplot", "visualisation": "boxplot"},
                      {"id": "hop", "visualisation": "hop"}],
        }

    def test_outer_product(self):
        t = tasks.parse_template(self._doc())
        leaves = t.leaves()
        assert [l.id for l in leaves] == [
            "q1__boxplot", "q1__hop", "q2__boxplot", "q2__hop"]
        assert leaves[1].visualisation == "hop"
        assert leaves[2].query_id == "q2"

    def test_overlapping_fields_rejected(self):
        doc = self._doc()
        doc["right"][0]["model_ref"] = "other"
        with pytest.raises(TemplateError):
            tasks.parse_template(doc)

    def test_incomplete_product_rejected(self):
        doc = self._doc()
        del doc["left"][0]["answer_input"]
        with pytest.raises(TemplateError):
            tasks.parse_template(doc)

    def test_empty_side_rejected(self):
        doc = self._doc()
        doc["left"] = []
        with pytest.raises(TemplateError):
            tasks.parse_template(doc)


class TestExpansion:
    def _nested(self):
        return tasks.parse_template({
            "kind": "tasklist", "ordered": True,
            "children": [
                task_doc("intro"),
                {"kind": "tasklist", "ordered": False,
                 "children": [task_doc("a"), task_doc("b"), task_doc("c")]},
                task_doc("outro"),
            ],
        })

    def test_deterministic_per_seed(self):
        t = self._nested()
        a = [x.id for x in tasks.expand_for_user(t, 7)]
        b = [x.id for x in tasks.expand_for_user(t, 7)]
        assert a == b

    def test_ordered_frame_preserved(self):
        t = self._nested()
        for seed in range(50):
            ids = [x.id for x in tasks.expand_for_user(t, seed)]
            assert ids[0] == "intro" and ids[-1] == "outro"
            assert sorted(ids[1:4]) == ["a", "b", "c"]

    def test_shuffle_actually_varies(self):
        t = self._nested()
        orders = {tuple(x.id for x in tasks.expand_for_user(t, s))
                  for s in range(50)}
        assert len(orders) > 1

    def test_shuffle_roughly_uniform(self):
        t = self._nested()
        from collections import Counter
        counts = Counter(tuple(x.id for x in tasks.expand_for_user(t, s))[1:4]
                         for s in range(3000))
        assert len(counts) == 6
        for c in counts.values():
            assert 380 < c < 620  # 3000/6 = 500 +- ~5 sigma

    def test_choose_k_subsets(self):
        t = tasks.parse_template({
            "kind": "tasklist", "ordered": False, "choose_k": 2,
            "children": [task_doc("a"), task_doc("b"), task_doc("c")],
        })
        seen = set()
        for seed in range(200):
            ids = tuple(sorted(x.id for x in tasks.expand_for_user(t, seed)))
            assert len(ids) == 2
            seen.add(ids)
        assert seen == {("a", "b"), ("a", "c"), ("b", "c")}

    def test_blocks_move_as_units(self):
        t = tasks.parse_template({
            "kind": "tasklist", "ordered": False,
            "children": [
                {"kind": "tasklist", "ordered": True,
                 "children": [task_doc("a1"), task_doc("a2")]},
                {"kind": "tasklist", "ordered": True,
                 "children": [task_doc("b1"), task_doc("b2")]},
            ],
        })
        for seed in range(30):
            ids = [x.id for x in tasks.expand_for_user(t, seed)]
            assert ids in (["a1", "a2", "b1", "b2"],
                           ["b1", "b2", "a1", "a2"])


class TestCafeTemplates:
    def test_48_task_template(self):
        t = cafe_study.study_template_48("blob")
        leaves = t.leaves()
        assert len(leaves) == 48
        qids = {l.query_id for l in leaves}
        assert len(qids) == 24
        # every query appears under exactly two visualisations: one
        # animated/static pair and one interactive/non-interactive pair
        by_query = {}
        for l in leaves:
            by_query.setdefault(l.query_id, []).append(l.visualisation)
        for vis_pair in by_query.values():
            assert sorted(vis_pair) in (["bhop", "boxplot"],
                                        ["hop", "interactive_boxplot"])

    def test_48_interactive_block_separation(self):
        t = cafe_study.study_template_48("blob")
        for seed in range(20):
            expanded = tasks.expand_for_user(t, seed)
            assert len(expanded) == 48
            flags = [x.interactive for x in expanded]
            # non-interactive and interactive tasks form contiguous blocks
            assert len([i for i in range(1, 48)
                        if flags[i] != flags[i - 1]]) == 1

    def test_24_task_template(self):
        t = cafe_study.study_template_24("blob")
        leaves = t.leaves()
        assert len(leaves) == 24
        assert len({l.id for l in leaves}) == 24

    def test_round_trip_through_json(self):
        t = cafe_study.study_template_48("blob")
        again = tasks.parse_template(json.dumps(t.document))
        assert [l.id for l in again.leaves()] == [l.id for l in t.leaves()]

    def test_rationality_task_count(self):
        t = cafe_study.study_template_48("blob")
        rational = [l for l in t.leaves()
                    if l.objective.kind == "expected_utility"]
        assert len(rational) == 8  # 4 queries x 2 visualisations
