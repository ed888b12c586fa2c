import json
from pathlib import Path

import pytest

from privstmt.corpus import Annotation, MethodSample, PrivacyLabel, Selection
from privstmt.javastmt import extract

FIXTURES = Path(__file__).parent / "fixtures"
ADAPTERS = Path(__file__).parent / "adapters"

# Statement bank reused by the synthetic corpora: three (or more) statements
# of every category the order-trend analysis needs, so any triple of
# categories can be mapped to distinct statement indices.
BANK_CODE = """\
void bank() {
    int a0 = 0;
    int a1 = 0;
    int a2 = 0;
    b0 = b0 + 1;
    b1 = b1 + 1;
    b2 = b2 + 1;
    if (b0 > 0) {
        c0 = c0 + 1;
    } else {
        e0 = e0 + 1;
    }
    if (b1 > 0) {
        c1 = c1 + 1;
    } else {
        e1 = e1 + 1;
    }
    if (b2 > 0) {
        c2 = c2 + 1;
    } else {
        e2 = e2 + 1;
    }
    d0();
    d1();
    d2();
    return r0;
    return r1;
    return r2;
}
"""


@pytest.fixture(scope="session")
def labeled_methods():
    with open(FIXTURES / "methods_labeled.json", encoding="utf-8") as fp:
        return json.load(fp)["methods"]


@pytest.fixture(scope="session")
def bank_method():
    return extract("bank", BANK_CODE)


@pytest.fixture(scope="session")
def bank_pools(bank_method):
    """Category -> list of statement indices, func_call precedence ON."""
    pools = {}
    for st in bank_method.statements:
        pools.setdefault(st.category, []).append(st.index)
    return pools


def make_sample(sample_id: str, code: str = None, label=PrivacyLabel.ANALYTICS) -> MethodSample:
    if code is None:
        code = "void f() {\n    int x = 0;\n}\n"
    return MethodSample(id=sample_id, code=code, label=label)


def make_annotation(sample_id: str, annotator_id: str, indices, rationales=None) -> Annotation:
    sels = tuple(
        Selection(
            order=i + 1,
            statement_index=idx,
            rationale=(rationales[i] if rationales and i < len(rationales) else None),
        )
        for i, idx in enumerate(indices)
    )
    return Annotation(sample_id=sample_id, annotator_id=annotator_id, selections=sels)


def adapter_cmd(name: str) -> str:
    import sys

    return f"{sys.executable} {ADAPTERS / name}"
