import json
from pathlib import Path

import pytest

from ffde.kripke import KripkeModel
from ffde.syntax import Signature, parse_formula

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
MODELS = FIXTURES / "models"
GOLDEN = ROOT / "golden"


def load_model(name: str):
    sig = Signature.load(MODELS / f"{name}.sig.json")
    return sig, KripkeModel.load(MODELS / f"{name}.json", sig)


def queries():
    return json.loads((GOLDEN / "queries.json").read_text())


@pytest.fixture
def pc_qc():
    return load_model("pc_qc")


@pytest.fixture
def constant_domain():
    return load_model("constant_domain")


@pytest.fixture
def self_identity():
    return load_model("exists_self_identity")


@pytest.fixture
def gen_neq():
    return load_model("generalized_neq")


@pytest.fixture
def proof_sig():
    return Signature.load(FIXTURES / "proofs.sig.json")


def f(text, sig, variables=()):
    return parse_formula(text, sig, variables)
