import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irrigame.agronomy import (
    CHANNELS,
    N_FEATURES,
    N_TERMS,
    TERM_NAMES,
    CropCoefficients,
    CropResponse,
    SurrogateModel,
    WeatherYear,
    estimate_evaporation,
    evaluate_surrogate,
    expand_features,
    fit_surrogate,
    load_surrogate_csv,
    save_surrogate_csv,
    surrogate_from_rows,
    surrogate_to_rows,
)


def weather(year=2000, pa=480.0, ps=320.0, pw=160.0, ss=25.0, sw=12.0, tx=21.0, tn=5.0):
    return WeatherYear(year, pa, ps, pw, ss, sw, tx, tn)


def constant_model(tr=300.0, ir=250.0, et=400.0, sp=200.0, yld=150.0, crop="corn"):
    coeffs = np.zeros((len(CHANNELS), N_TERMS))
    coeffs[:, 0] = [tr, ir, et, sp, yld]
    cc = CropCoefficients(
        coeffs=coeffs,
        feature_min=np.full(N_FEATURES, -np.inf),
        feature_max=np.full(N_FEATURES, np.inf),
        rmse=np.zeros(len(CHANNELS)),
    )
    return SurrogateModel(crops=(crop,), by_crop={crop: cc})


def random_quadratic_rows(rng, n_rows):
    """Training rows generated exactly from a known quadratic over small features."""
    true = rng.uniform(-0.5, 0.5, size=(len(CHANNELS), N_TERMS))
    true[:, 0] = [300.0, 250.0, 400.0, 200.0, 150.0]   # intercepts keep targets positive
    true[2] = true[0].copy()
    true[2, 0] = true[0, 0] + 50.0                      # ET = TR + 50 everywhere
    rows = []
    for _ in range(n_rows):
        ps, pw = rng.uniform(0.0, 1.0, size=2)
        w = WeatherYear(
            year=2000,
            precip_annual=ps + pw + rng.uniform(0.0, 1.0),
            precip_summer=ps,
            precip_winter=pw,
            solar_summer=rng.uniform(0.0, 2.0),
            solar_winter=rng.uniform(0.0, 2.0),
            tmax_mean=rng.uniform(0.0, 2.0),
            tmin_mean=rng.uniform(0.0, 2.0),
        )
        targets = true @ expand_features(w.features())
        rows.append((w, CropResponse(*targets)))
    return true, rows


class TestWeatherYear:
    def test_rejects_negative_precipitation(self):
        with pytest.raises(ValueError):
            weather(ps=-1.0)

    def test_rejects_seasons_exceeding_annual(self):
        with pytest.raises(ValueError, match="exceeds"):
            weather(pa=400.0, ps=300.0, pw=150.0)

    def test_feature_vector_order(self):
        w = weather()
        np.testing.assert_array_equal(
            w.features(), [480.0, 320.0, 160.0, 25.0, 12.0, 21.0, 5.0]
        )


class TestCropResponse:
    def test_rejects_et_below_tr(self):
        with pytest.raises(ValueError, match="transpiration"):
            CropResponse(300.0, 100.0, 250.0, 200.0, 50.0)

    def test_yield_unit_conversion(self):
        r = CropResponse(0.0, 0.0, 0.0, 0.0, 4046.8564224)
        assert r.yield_bu_m2 == pytest.approx(1.0, rel=1e-15)


class TestExpandFeatures:
    def test_term_count(self):
        assert N_TERMS == 36
        assert len(TERM_NAMES) == 36

    def test_known_expansion(self):
        f = np.arange(1.0, 8.0)
        phi = expand_features(f)
        assert phi[0] == 1.0
        np.testing.assert_array_equal(phi[1:8], f)
        assert phi[8] == 1.0          # f0*f0
        assert phi[9] == 2.0          # f0*f1
        assert phi[-1] == 49.0        # f6*f6


class TestEvaluate:
    def test_intercept_only_model_returns_constants(self):
        model = constant_model()
        for w in (weather(), weather(ps=250.0, pa=500.0), weather(tx=24.0)):
            r = evaluate_surrogate(model, w, "corn")
            assert (r.transpiration_mm, r.irrigation_mm, r.evapotranspiration_mm) == (300.0, 250.0, 400.0)
            assert (r.season_precip_mm, r.yield_bu_acre) == (200.0, 150.0)
            assert not r.clamped

    def test_negative_prediction_clamped_with_flag(self):
        model = constant_model(ir=-5.0)
        r = evaluate_surrogate(model, weather(), "corn")
        assert r.irrigation_mm == 0.0
        assert r.clamped

    def test_et_raised_to_transpiration_after_clamp(self):
        model = constant_model(tr=300.0, et=120.0)
        r = evaluate_surrogate(model, weather(), "corn")
        assert r.evapotranspiration_mm == r.transpiration_mm == 300.0
        assert r.clamped

    def test_extrapolation_flag(self):
        coeffs = np.zeros((len(CHANNELS), N_TERMS))
        coeffs[:, 0] = [300.0, 250.0, 400.0, 200.0, 150.0]
        cc = CropCoefficients(
            coeffs=coeffs,
            feature_min=np.full(N_FEATURES, 0.0),
            feature_max=np.full(N_FEATURES, 100.0),
            rmse=np.zeros(len(CHANNELS)),
        )
        model = SurrogateModel(crops=("corn",), by_crop={"corn": cc})
        inside = WeatherYear(2000, 90.0, 50.0, 40.0, 20.0, 10.0, 15.0, 5.0)
        outside = WeatherYear(2000, 150.0, 50.0, 40.0, 20.0, 10.0, 15.0, 5.0)
        assert not evaluate_surrogate(model, inside, "corn").extrapolated
        assert evaluate_surrogate(model, outside, "corn").extrapolated

    def test_unknown_crop_errors(self):
        with pytest.raises(KeyError, match="unknown crop"):
            evaluate_surrogate(constant_model(), weather(), "rice")


class TestFit:
    def test_generate_then_recover(self):
        rng = np.random.default_rng(42)
        true, rows = random_quadratic_rows(rng, 2 * N_TERMS)
        cc = fit_surrogate(rows)
        np.testing.assert_allclose(cc.coeffs, true, atol=1e-6)
        assert np.all(cc.rmse <= 1e-8)
        model = SurrogateModel(crops=("corn",), by_crop={"corn": cc})
        for w, resp in rows[:10]:
            out = evaluate_surrogate(model, w, "corn")
            for ch in CHANNELS:
                assert getattr(out, ch) == pytest.approx(getattr(resp, ch), abs=1e-8)

    def test_constant_response_column_fits_intercept(self):
        rng = np.random.default_rng(7)
        _, rows = random_quadratic_rows(rng, 2 * N_TERMS)
        rows = [
            (w, CropResponse(100.0, r.irrigation_mm, r.evapotranspiration_mm + 200.0,
                             r.season_precip_mm, r.yield_bu_acre))
            for w, r in rows
        ]
        cc = fit_surrogate(rows)
        tr_idx = CHANNELS.index("transpiration_mm")
        assert cc.coeffs[tr_idx, 0] == pytest.approx(100.0, abs=1e-9)
        np.testing.assert_allclose(cc.coeffs[tr_idx, 1:], 0.0, atol=1e-9)

    def test_duplicated_rows_do_not_change_fit(self):
        rng = np.random.default_rng(3)
        _, rows = random_quadratic_rows(rng, N_TERMS + 10)
        single = fit_surrogate(rows)
        doubled = fit_surrogate(rows + rows)
        np.testing.assert_allclose(doubled.coeffs, single.coeffs, atol=1e-9)

    def test_too_few_rows(self):
        rng = np.random.default_rng(0)
        _, rows = random_quadratic_rows(rng, N_TERMS - 1)
        with pytest.raises(ValueError, match="training rows"):
            fit_surrogate(rows)

    def test_rank_deficient_falls_back_to_ridge_with_warning(self):
        rng = np.random.default_rng(0)
        _, rows = random_quadratic_rows(rng, 1)
        rows = rows * (N_TERMS + 5)   # one distinct sample, rank 1 design
        with pytest.warns(UserWarning, match="rank-deficient"):
            cc = fit_surrogate(rows)
        assert cc.ridge_fallback


class TestEstimateEvaporation:
    def test_zero_when_et_equals_tr(self):
        rs = [CropResponse(200.0, 0.0, 200.0, 100.0, 10.0)] * 3
        assert estimate_evaporation(rs, 500.0) == 0.0

    def test_hand_value(self):
        # season precip 150 + 100 = 250, in-season evaporation 60 + 40 = 100
        rs = [
            CropResponse(100.0, 0.0, 160.0, 150.0, 10.0),
            CropResponse(80.0, 0.0, 120.0, 100.0, 10.0),
        ]
        assert estimate_evaporation(rs, 500.0) == pytest.approx(200.0, rel=1e-12)

    def test_linear_in_annual_precip(self):
        rs = [CropResponse(100.0, 0.0, 160.0, 150.0, 10.0)]
        assert estimate_evaporation(rs, 1000.0) == pytest.approx(
            2.0 * estimate_evaporation(rs, 500.0), rel=1e-12
        )

    def test_zero_season_precip_errors(self):
        rs = [CropResponse(100.0, 0.0, 160.0, 0.0, 10.0)]
        with pytest.raises(ValueError, match="undefined"):
            estimate_evaporation(rs, 500.0)

    @given(scale=st.floats(min_value=0.1, max_value=10.0))
    @settings(max_examples=25, deadline=None)
    def test_homogeneous_in_evaporation_residual(self, scale):
        base = [CropResponse(100.0, 0.0, 160.0, 150.0, 10.0)]
        scaled = [CropResponse(100.0, 0.0, 100.0 + 60.0 * scale, 150.0, 10.0)]
        assert estimate_evaporation(scaled, 480.0) == pytest.approx(
            scale * estimate_evaporation(base, 480.0), rel=1e-9
        )


class TestPersistence:
    def test_csv_round_trip(self, tmp_path):
        rng = np.random.default_rng(11)
        _, rows = random_quadratic_rows(rng, N_TERMS + 5)
        model = SurrogateModel(crops=("corn",), by_crop={"corn": fit_surrogate(rows)})
        path = tmp_path / "model.csv"
        save_surrogate_csv(model, path)
        loaded = load_surrogate_csv(path)
        assert loaded.crops == model.crops
        np.testing.assert_allclose(
            loaded.by_crop["corn"].coeffs, model.by_crop["corn"].coeffs, rtol=1e-15
        )
        np.testing.assert_allclose(
            loaded.by_crop["corn"].feature_min, model.by_crop["corn"].feature_min
        )

    def test_rows_round_trip_exact(self):
        model = constant_model()
        again = surrogate_from_rows(surrogate_to_rows(model))
        np.testing.assert_array_equal(
            again.by_crop["corn"].coeffs, model.by_crop["corn"].coeffs
        )

    def test_bad_header_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError, match="header"):
            load_surrogate_csv(p)

    def test_unknown_term_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("crop,channel,term,value\ncorn,transpiration_mm,bogus,1.0\n")
        with pytest.raises(ValueError, match="unknown term"):
            load_surrogate_csv(p)
