import numpy as np
import pytest

import riskcontest as rc

# The recorded classroom contest used as the canonical regression fixture:
# seven relevant variables out of twenty, effects as revealed after the game.
CLASSROOM_EFFECTS = {3: -0.9, 6: -0.72, 10: 0.53, 12: -1.26, 14: -0.64, 16: -0.8, 20: -1.13}
CLASSROOM_PICKS = {
    "team_a": (3, 6, 8, 16, 17, 20),
    "team_b": (3, 6, 8),
    "team_c": (3, 5, 6, 12, 16, 17),
    "team_d": (3, 5, 6, 12, 17),
}
CLASSROOM_SCORES = {"team_a": 44, "team_b": 31, "team_c": 44, "team_d": 31}


@pytest.fixture(scope="session")
def classroom_truth() -> rc.GroundTruth:
    prev = rc.prevalence_grid(20, 0.03, 0.001)
    return rc.GroundTruth(tuple(sorted(CLASSROOM_EFFECTS)), dict(CLASSROOM_EFFECTS),
                          (), tuple(float(p) for p in prev))


@pytest.fixture(scope="session")
def classroom_submissions() -> dict[str, rc.Submission]:
    return {team: rc.Submission(team, picks) for team, picks in CLASSROOM_PICKS.items()}


@pytest.fixture(scope="session")
def default_contest() -> tuple[rc.GroundTruth, rc.Dataset]:
    """One full-size contest instance shared by the slower tests."""
    config = rc.SimulationConfig(seed=424242)
    rng = np.random.default_rng(config.seed)
    truth = rc.draw_ground_truth(config, rng)
    return truth, rc.simulate_dataset(truth, config, rng)


def two_by_two(exposed_cases, exposed_controls, unexposed_cases, unexposed_controls):
    """Single binary covariate laid out from its 2x2 table."""
    x = np.concatenate([
        np.ones(exposed_cases + exposed_controls),
        np.zeros(unexposed_cases + unexposed_controls),
    ])
    y = np.concatenate([
        np.ones(exposed_cases), np.zeros(exposed_controls),
        np.ones(unexposed_cases), np.zeros(unexposed_controls),
    ])
    return x[:, None], y


def planted_dataset(n=600, d=8, prevalence=0.5, effect=3.0, seed=0) -> rc.Dataset:
    """One strong predictor in column 1, the rest pure noise."""
    rng = np.random.default_rng(seed)
    x = (rng.random((n, d)) < prevalence).astype(np.int8)
    eta = -1.0 + effect * x[:, 0]
    y = (rng.random(n) < rc.expit(eta)).astype(np.int8)
    if y.sum() < 8 or y.sum() > n - 8:  # keep folds stratifiable
        return planted_dataset(n, d, prevalence, effect, seed + 10_000)
    return rc.Dataset(x, y)


def null_dataset(n=400, d=6, prevalence=0.3, seed=0) -> rc.Dataset:
    rng = np.random.default_rng(seed)
    x = (rng.random((n, d)) < prevalence).astype(np.int8)
    y = np.zeros(n, dtype=np.int8)
    y[: n // 2] = 1
    rng.shuffle(y)
    return rc.Dataset(x, y)
