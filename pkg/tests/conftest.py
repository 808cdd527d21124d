from __future__ import annotations

import pytest

from hdlpoison.casestudies import (
    build_all_case_studies,
    build_backdoored_spec,
    build_clean_spec,
)
from hdlpoison.gateway import MockModel


@pytest.fixture(scope="session")
def case_studies():
    return build_all_case_studies()


@pytest.fixture(scope="session")
def pairs_by_study(case_studies):
    return {p.study_id: p for p in case_studies}


@pytest.fixture(scope="session")
def backdoored_model(case_studies):
    return MockModel(build_backdoored_spec(case_studies))


@pytest.fixture(scope="session")
def clean_model():
    return MockModel(build_clean_spec())
