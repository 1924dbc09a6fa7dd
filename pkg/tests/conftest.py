import sys
from pathlib import Path

import pytest

from anonpipe.table import AttributeMeta, Table, load_csv, load_schema

REPO = Path(__file__).resolve().parent.parent
DATA = REPO / "tests" / "data"

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def repo_root() -> Path:
    return REPO


@pytest.fixture(scope="session")
def sample_schema():
    return load_schema(REPO / "data" / "ms_covid_sample.schema")


@pytest.fixture(scope="session")
def sample_table(sample_schema) -> Table:
    return load_csv(REPO / "data" / "ms_covid_sample.csv", sample_schema,
                    name="sample")


@pytest.fixture(scope="session")
def sample_deidentified() -> Table:
    schema = [AttributeMeta(n, "categorical") for n in (
        "secret_name", "age", "edss", "covid19_symptoms", "comorbidities",
        "ms_type", "ms_diagnosis_date", "bmi")]
    return load_csv(DATA / "ms_covid_sample_deidentified.csv", schema,
                    name="sample")


def make_table(columns: dict[str, list[str]], kinds: dict[str, str] | None = None,
               name: str = "t") -> Table:
    """Build a table column-wise for terse test setup."""
    kinds = kinds or {}
    attrs = tuple(AttributeMeta(n, kinds.get(n, "categorical"))
                  for n in columns)
    n_rows = len(next(iter(columns.values()))) if columns else 0
    rows = tuple(tuple(columns[a.name][i] for a in attrs)
                 for i in range(n_rows))
    return Table(name, attrs, rows)


@pytest.fixture
def strategy_table() -> Table:
    """The 6-row demonstration table used by the strategy goldens."""
    return make_table({
        "Name": ["Emma", "Bob", "Tommy", "Michael", "Sara", "Ziggy"],
        "Postal code": ["3500", "3510", "3520", "3530", "3540", "3550"],
        "Age": ["25", "32", "36", "45", "23", "43"],
        "Sex": ["F", "M", "M", "M", "F", "M"],
        "Diagnosis": ["Gastric flu", "Flu", "COVID", "Gastric flu", "Flu",
                      "COVID"],
    }, kinds={"Age": "numeric"})
