import numpy as np
import pytest

from sigbook.market_features import normalize, write_order_book_csv
from sigbook.signature import Stream, area, second_order_area, stream_signature
from sigbook.synthetic import PROFILES, GeneratorConfig, base_profile, generate_dataset, generate_stream


def volume_signature(profile, noise=0.0, index=0, n=60, depth=3):
    s = generate_stream(GeneratorConfig(profile, n_points=n, noise_level=noise, seed=5), index)
    z = normalize(s)
    return stream_signature(Stream(np.column_stack([z.u, z.c])), depth)


@pytest.mark.parametrize("profile", PROFILES)
def test_profiles_are_cdfs(profile):
    u = np.linspace(0, 1, 101)
    c = base_profile(profile, u)
    assert c[0] == pytest.approx(0, abs=1e-15) and c[-1] == pytest.approx(1, abs=1e-15)
    assert np.all(np.diff(c) > 0)


def test_symmetric_profiles_are_point_symmetric():
    u = np.linspace(0, 1, 59)
    for p in ("mid_loaded", "front_and_back_loaded"):
        c = base_profile(p, u)
        assert np.allclose(c + c[::-1], 1, atol=1e-14)


@pytest.mark.parametrize("profile", PROFILES)
def test_generated_streams_validate(profile):
    for noise in (0.0, 0.3, 1.5):
        for i in range(5):
            generate_stream(GeneratorConfig(profile, n_points=20, noise_level=noise), i).validate()


def test_noise_free_area_signs():
    assert area(volume_signature("back_loaded"), 1, 2) > 0
    assert area(volume_signature("front_loaded"), 1, 2) < 0
    assert area(volume_signature("flat"), 1, 2) == pytest.approx(0, abs=1e-12)


def test_noise_free_second_order_signs():
    mid = volume_signature("mid_loaded")
    fab = volume_signature("front_and_back_loaded")
    assert abs(area(mid, 1, 2)) <= 1e-10 and abs(area(fab, 1, 2)) <= 1e-10
    assert second_order_area(mid, 1, 2) < 0 < second_order_area(fab, 1, 2)


def test_symmetric_classes_match_to_depth_two():
    mid = volume_signature("mid_loaded", depth=2)
    fab = volume_signature("front_and_back_loaded", depth=2)
    assert mid.allclose(fab, atol=1e-10)


def test_noisy_classes_keep_second_order_sign_on_average():
    mids = [second_order_area(volume_signature("mid_loaded", 0.3, i), 1, 2) for i in range(40)]
    fabs = [second_order_area(volume_signature("front_and_back_loaded", 0.3, i), 1, 2) for i in range(40)]
    assert np.mean(mids) < 0 < np.mean(fabs)


def test_determinism_per_index():
    cfg = GeneratorConfig("mid_loaded", seed=11)
    a, b = generate_stream(cfg, 3), generate_stream(cfg, 3)
    assert a.id == b.id
    assert np.array_equal(a.cum_volume, b.cum_volume) and np.array_equal(a.ask, b.ask)
    assert not np.array_equal(a.cum_volume, generate_stream(cfg, 4).cum_volume)


def test_dataset_counts_and_ids():
    cfg = GeneratorConfig("flat", count=10)
    data = generate_dataset(cfg, cfg)
    assert len(data) == 20
    assert [s.label for s in data] == [0] * 10 + [1] * 10
    assert len({s.id for s in data}) == 20


def test_dataset_csv_is_reproducible(tmp_path):
    cfg_a = GeneratorConfig("back_loaded", n_points=10, seed=1, count=4)
    cfg_b = GeneratorConfig("front_loaded", n_points=10, seed=2, count=4)
    write_order_book_csv(tmp_path / "a.csv", generate_dataset(cfg_a, cfg_b))
    write_order_book_csv(tmp_path / "b.csv", generate_dataset(cfg_a, cfg_b))
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


@pytest.mark.parametrize("kw", [dict(profile_class="steep"), dict(n_points=2), dict(noise_level=-1), dict(count=-1)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        GeneratorConfig(**kw)
