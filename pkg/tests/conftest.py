import pytest

from gridcap import synthetic


@pytest.fixture(scope="session")
def micro_dir(tmp_path_factory):
    """Single-zone wind/gas/battery dataset saved to disk, no hydrogen."""
    d = tmp_path_factory.mktemp("data") / "micro"
    synthetic.micro_system(name="micro", h2=False).save(d)
    return d


@pytest.fixture(scope="session")
def micro_h2_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("data_h2") / "micro_h2"
    synthetic.micro_system(name="micro_h2", h2=True).save(d)
    return d
