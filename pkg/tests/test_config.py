import pytest

from swegsa.campaign.config import DEFAULT_MAX_WORKERS, ConfigError, load_study
from swegsa.campaign.probes import AreaMax, AreaMean, FullMap, Point
from swegsa.campaign.valley import write_valley_study
from swegsa.grid import Grid
from swegsa.swe.state import FreeOutflow, ImposedDischarge, Wall


@pytest.fixture
def study(tmp_path):
    return write_valley_study(tmp_path, n=8, t_end=30.0, resolutions=(2, 5))


def edit(path, old, new):
    text = path.read_text()
    assert old in text
    path.write_text(text.replace(old, new))
    return path


def test_valley_study_parses(study):
    cfg = load_study(study)
    assert [s.param.name for s in cfg.parameters] == ["E", "S", "R"]
    assert [s.role for s in cfg.parameters] == ["error", "structure", "resolution"]
    assert cfg.by_role("error").sigma == 0.2 and cfg.by_role("error").pool == 100
    assert cfg.n == 8 and cfg.seed == 2024 and cfg.retries == 1
    assert cfg.base_grid == Grid(100, 150, 1.0)
    assert cfg.resolutions() == [2.0, 5.0]
    assert cfg.analysis_grid == Grid(20, 30, 5.0)
    assert cfg.structure_levels() == ["S1", "S2"]
    assert isinstance(cfg.probes["channel"], Point)
    assert isinstance(cfg.probes["bank_mean"], AreaMean)
    assert isinstance(cfg.probes["bank_max"], AreaMax)
    assert cfg.probes["wse"] == FullMap(wet_depth=0.01)
    bcs = cfg.scenario.solver.boundaries
    assert isinstance(bcs["north"], ImposedDischarge) and isinstance(bcs["south"], FreeOutflow)
    assert isinstance(bcs["east"], Wall)
    assert cfg.scenario.inflow(5.0) == pytest.approx(100.0 * 5.0 / 10.0)  # ramp of t_end / 3


def test_default_max_workers(study):
    edit(study, "max_workers = 30\n", "")
    assert load_study(study).max_workers == DEFAULT_MAX_WORKERS == 30


@pytest.mark.parametrize("old,new,match", [
    ('S1 = "valley_s1.asc"', 'S1 = "nowhere.asc"', "scenario.structures.S1"),
    ("max_workers = 30", "max_workers = 0", "max_workers"),
    ('role = "error"', 'role = "weather"', "weather"),
    ("x = 50.5", "x = 150.5", "probes.channel"),
    ("values = [2.0, 5.0]", "values = [2.0, 4.0]", "resolution 4.0"),
    ('levels = ["S1", "S2"]', 'levels = ["S1", "S3"]', "S3"),
    ('kind = "full_map"', 'kind = "contour"', "probes.wse.kind"),
    ("t_end = 30.0", 't_end = "long"', "scenario.t_end"),
    ("[campaign]", "[campain]", "campain"),
    ('north = "inflow"', 'north = "river"', "scenario.boundaries.north"),
    ("sigma = 0.2", "sigma = -0.2", "sigma"),
])
def test_config_errors_name_the_key(study, old, new, match):
    edit(study, old, new)
    with pytest.raises(ConfigError, match=match):
        load_study(study)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="does not exist"):
        load_study(tmp_path / "study.toml")


def test_malformed_toml(study):
    study.write_text(study.read_text() + "\n[broken\n")
    with pytest.raises(ConfigError):
        load_study(study)


def test_mismatched_georeference(study, tmp_path):
    from swegsa.io import read_ascii_grid, write_ascii_grid
    from swegsa.io import Raster

    s2 = read_ascii_grid(tmp_path / "valley_s2.asc")
    moved = Grid(s2.grid.ncols, s2.grid.nrows, s2.grid.cellsize, 10.0, 0.0)
    write_ascii_grid(Raster(moved, s2.values), tmp_path / "valley_s2.asc")
    with pytest.raises(ConfigError, match="georeference"):
        load_study(study)


def test_duplicate_roles(study):
    text = study.read_text() + '\n[parameters.E2]\nrole = "error"\nsigma = 0.1\n'
    study.write_text(text)
    with pytest.raises(ConfigError, match="more than one"):
        load_study(study)


def test_hydraulic_parameter_roles(study):
    text = study.read_text() + (
        '\n[parameters.K]\nrole = "friction"\n'
        'distribution = { kind = "uniform", a = 0.02, b = 0.06 }\n'
    )
    study.write_text(text)
    cfg = load_study(study)
    assert cfg.by_role("friction").param.name == "K"
