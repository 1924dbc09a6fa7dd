"""anonpipe: risk-driven anonymisation toolkit for tabular microdata.

Three stages: classify attributes by re-identification risk, de-identify
them under a declarative rule set, and evaluate privacy (k, l, t) against
utility (non-uniform entropy) across QID dimensions to pick the optimal
one. Ships a seeded mock-data generator, a CLI, and an HTTP workbench
service.
"""

from .table import (MISSING, AttributeMeta, Table, drop_sparse_attributes,
                    load_csv, load_schema, normalize_missing, write_csv)
from .identify import (Classification, GDistinctHistogram, RiskProfile,
                       Thresholds, classify, g_distinct,
                       identification_report, risk_rate)
from .deidentify import (Bin, Rule, RuleSet, aggregate, apply_ruleset,
                         generalize_numeric, generalize_year, load_rules,
                         mask, suppress)
from .metrics import (EquivalenceClass, MetricsReport, k_anonymity,
                      l_diversity, nue, partition, privacy_gain, t_closeness)
from .dimension import (DimensionCandidate, FeasibilityConstraints,
                        dimension_report, enumerate_dimensions,
                        select_optimal)
from .mockgen import GeneratorSpec, default_spec, generate, generate_pair
from .pipeline import run_pipeline
from .config import RunConfig, load_config

__version__ = "0.1.0"
