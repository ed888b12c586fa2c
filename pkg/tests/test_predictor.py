"""Baseline prior, greedy prediction, text matching, and the adapter protocol."""

import random

import pytest

from conftest import adapter_cmd, make_annotation, make_sample
from privstmt.corpus import PrivacyLabel
from privstmt.javastmt import ALL_CATEGORIES, extract
from privstmt.predictor import (
    AdapterConfig,
    AdapterExit,
    AdapterProtocolError,
    AdapterTimeout,
    CategoryPrior,
    EmptyTrainingSet,
    GLOBAL_TABLE,
    adapter_predict,
    load_prior,
    match_statement,
    predict_baseline,
    prior_from_obj,
    prior_to_obj,
    save_prior,
    train_baseline,
)

CODE = "void f() {\n    int a = 0;\n    b = b + 1;\n    g();\n    if (b > 0) {\n        c = 1;\n    }\n    return b;\n}\n"
# statements: 0 sig, 1 decl, 2 expr, 3 func_call, 4 if, 5 expr, 6 return


@pytest.fixture
def method():
    return extract("s1", CODE)


def _train_fixture(method, orders_to_cat):
    anns = []
    cat_to_idx = {}
    for st in method.statements:
        cat_to_idx.setdefault(st.category, st.index)
    for i, cats in enumerate(orders_to_cat):
        indices = [cat_to_idx[c] for c in cats]
        anns.append(make_annotation("s1", f"a{i}", indices))
    return anns


def test_train_baseline_limit_alpha_to_zero(method):
    anns = _train_fixture(method, [["decl_stmt"], ["decl_stmt"], ["decl_stmt"]])
    prior = train_baseline(anns, {"s1": method}, alpha=1e-12)
    assert prior.prob("decl_stmt", 1) == pytest.approx(1.0, abs=1e-6)


def test_train_baseline_large_alpha_approaches_uniform(method):
    anns = _train_fixture(method, [["decl_stmt"]])
    prior = train_baseline(anns, {"s1": method}, alpha=1e9)
    uniform = 1.0 / len(ALL_CATEGORIES)
    assert prior.prob("decl_stmt", 1) == pytest.approx(uniform, rel=1e-6)
    assert prior.prob("while", 3) == pytest.approx(uniform, rel=1e-6)


def test_prior_rows_sum_to_one_and_positive(method):
    anns = _train_fixture(method, [["decl_stmt", "expr_stmt"], ["func_call"]])
    prior = train_baseline(anns, {"s1": method}, alpha=0.5)
    for positions in prior.tables.values():
        for row in positions.values():
            assert sum(row.values()) == pytest.approx(1.0, abs=1e-9)
            assert all(p > 0 for p in row.values())


def test_train_baseline_empty_raises(method):
    with pytest.raises(EmptyTrainingSet):
        train_baseline([], {"s1": method}, alpha=1.0)


def test_train_baseline_recovers_sampled_frequencies(bank_method, bank_pools):
    # synthetic first-position selections drawn to match a 49.1% target
    rng = random.Random(11)
    cats = ["expr_stmt"] * 491 + ["decl_stmt"] * 277 + ["if_stmt"] * 173 + ["return"] * 38 + ["else"] * 21
    rng.shuffle(cats)
    anns = [
        make_annotation("bank", f"a{i}", [bank_pools[c][0]]) for i, c in enumerate(cats)
    ]
    prior = train_baseline(anns, {"bank": bank_method}, alpha=1e-9)
    assert prior.prob("expr_stmt", 1) == pytest.approx(0.491, abs=0.001)
    assert prior.prob("decl_stmt", 1) == pytest.approx(0.277, abs=0.001)


def _concentrated_prior(by_position, funccall_on=True):
    n = len(ALL_CATEGORIES)
    eps = 1e-6
    tables = {GLOBAL_TABLE: {}}
    for pos in (1, 2, 3):
        fav = by_position.get(pos)
        row = {}
        for cat in ALL_CATEGORIES:
            row[cat] = (1.0 - eps * (n - 1)) if cat == fav else eps
        if fav is None:
            row = {cat: 1.0 / n for cat in ALL_CATEGORIES}
        tables[GLOBAL_TABLE][pos] = row
    return CategoryPrior(alpha=1e-6, funccall_on=funccall_on, per_label=False, tables=tables)


def test_predict_argmax_forced(method):
    prior = _concentrated_prior({1: "func_call", 2: "return", 3: "decl_stmt"})
    picks = predict_baseline(method, None, prior)
    assert picks[0] == 3  # the func_call statement
    assert picks[1] == 6  # the return
    assert picks[2] == 1  # the decl


def test_predict_short_method_truncates():
    mc = extract("s", "void f() {\n a = 1;\n}")
    prior = _concentrated_prior({1: "expr_stmt", 2: "expr_stmt", 3: "expr_stmt"})
    picks = predict_baseline(mc, None, prior, k=3)
    assert len(picks) == 2  # only 2 statements exist
    assert len(set(picks)) == 2


def test_predict_tie_break_earlier_line(method):
    prior = _concentrated_prior({1: "expr_stmt", 2: "expr_stmt"})
    picks = predict_baseline(method, None, prior, k=2)
    assert picks == [2, 5]  # two expr_stmt statements, earlier line first


def test_predict_deterministic_and_rescale_invariant(method):
    rng = random.Random(5)
    for _ in range(100):
        tables = {
            GLOBAL_TABLE: {
                pos: {cat: rng.uniform(0.01, 1.0) for cat in ALL_CATEGORIES} for pos in (1, 2, 3)
            }
        }
        # normalize rows
        for pos_row in tables[GLOBAL_TABLE].values():
            s = sum(pos_row.values())
            for cat in pos_row:
                pos_row[cat] /= s
        prior = CategoryPrior(alpha=1.0, funccall_on=True, per_label=False, tables=tables)
        base = predict_baseline(method, None, prior)
        assert base == predict_baseline(method, None, prior)
        scale = rng.uniform(0.1, 40.0)
        pos = rng.choice([1, 2, 3])
        scaled_tables = {
            GLOBAL_TABLE: {
                p: {c: (v * scale if p == pos else v) for c, v in row.items()}
                for p, row in tables[GLOBAL_TABLE].items()
            }
        }
        scaled = CategoryPrior(alpha=1.0, funccall_on=True, per_label=False, tables=scaled_tables)
        assert predict_baseline(method, None, scaled) == base


def test_predict_never_duplicates(method):
    rng = random.Random(17)
    for _ in range(50):
        tables = {
            GLOBAL_TABLE: {
                pos: {cat: rng.uniform(0.01, 1.0) for cat in ALL_CATEGORIES} for pos in (1, 2, 3)
            }
        }
        prior = CategoryPrior(alpha=1.0, funccall_on=True, per_label=False, tables=tables)
        picks = predict_baseline(method, None, prior)
        assert len(picks) == len(set(picks)) == min(3, len(method.statements))


def test_per_label_tables(method):
    samples = {"s1": make_sample("s1", code=CODE, label=PrivacyLabel.ADVERTISEMENT)}
    anns = _train_fixture(method, [["decl_stmt"], ["decl_stmt"]])
    prior = train_baseline(anns, {"s1": method}, alpha=0.1, per_label=True, samples=samples)
    assert prior.per_label
    assert "Advertisement" in prior.tables
    # unseen label falls back to the global table
    assert prior.prob("decl_stmt", 1, "Functionality") == prior.prob("decl_stmt", 1)


def test_prior_json_round_trip(tmp_path, method):
    anns = _train_fixture(method, [["decl_stmt", "expr_stmt", "return"]])
    prior = train_baseline(anns, {"s1": method}, alpha=2.0)
    p = tmp_path / "prior.json"
    save_prior(prior, p)
    loaded = load_prior(p)
    assert loaded == prior
    assert prior_from_obj(prior_to_obj(prior)) == prior


# -------------------- statement matching --------------------


def test_match_statement_normalizes_whitespace(method):
    assert match_statement("int  a   = 0;", method) == 1
    assert match_statement("\n b = b + 1; ", method) == 2


def test_match_statement_first_occurrence():
    mc = extract("s", "void f() {\n a = 1;\n a = 1;\n}")
    assert match_statement("a = 1;", mc) == 1


def test_match_statement_no_match_is_none(method):
    assert match_statement("zz = 99;", method) is None


# -------------------- adapter protocol --------------------


def test_adapter_const():
    cfg = AdapterConfig(command=adapter_cmd("const_adapter.py"), timeout=10)
    out = adapter_predict([("r0", "p0"), ("r1", "p1")], cfg)
    assert out == ["x;</s>", "x;</s>"]


def test_adapter_echo_round_trip_lossless():
    cfg = AdapterConfig(command=adapter_cmd("echo_adapter.py"), timeout=10)
    prompts = [("r0", "a;\tb;\tc;</s>"), ("r1", "only-one;</s>")]
    out = adapter_predict(prompts, cfg)
    assert out == [p for _, p in prompts]


def test_adapter_out_of_order_ids_reassembled():
    cfg = AdapterConfig(command=adapter_cmd("shuffled_adapter.py"), timeout=10, max_parallel=8)
    prompts = [(f"r{i}", f"prompt-{i}") for i in range(5)]
    out = adapter_predict(prompts, cfg)
    assert out == [f"echo:prompt-{i}" for i in range(5)]


def test_adapter_malformed_json():
    cfg = AdapterConfig(command=adapter_cmd("malformed_adapter.py"), timeout=10)
    with pytest.raises(AdapterProtocolError):
        adapter_predict([("r0", "p")], cfg)


def test_adapter_unknown_id():
    cfg = AdapterConfig(command=adapter_cmd("unknown_id_adapter.py"), timeout=10)
    with pytest.raises(AdapterProtocolError):
        adapter_predict([("r0", "p")], cfg)


def test_adapter_hang_times_out():
    cfg = AdapterConfig(command=adapter_cmd("hanging_adapter.py"), timeout=1.0)
    with pytest.raises(AdapterTimeout):
        adapter_predict([("r0", "p")], cfg)


def test_adapter_nonzero_exit():
    cfg = AdapterConfig(command=adapter_cmd("failing_adapter.py"), timeout=10)
    with pytest.raises(AdapterExit):
        adapter_predict([("r0", "p")], cfg)


def test_adapter_empty_prompt_list():
    cfg = AdapterConfig(command=adapter_cmd("const_adapter.py"), timeout=10)
    assert adapter_predict([], cfg) == []


def test_adapter_config_validation():
    with pytest.raises(ValueError):
        AdapterConfig(command="x", timeout=0)
    with pytest.raises(ValueError):
        AdapterConfig(command="x", max_parallel=0)
