"""Built-in experiments ``fig1`` ... ``fig11``.

Each preset is an :class:`~losmimo.config.ExperimentConfig`; values not
fixed by the experiment description (grids, series levels, trial and drop
counts) are chosen to keep a run at desk scale.
"""

from .config import ExperimentConfig, ScenarioSpec
from .errors import InvalidArgumentError

__all__ = ["PRESETS", "preset", "preset_names"]

BETA = 0.20479
M_SINGLE = (10, 20, 30, 50, 70, 100, 150, 200)
M_UPLINK = (30, 40, 50, 70, 100, 150, 200, 300)
M_LARGE = (30, 60, 100, 150, 200, 300)


def _fig1():
    base = ScenarioSpec(kind="single-user", N=10, beta=BETA, kappa_db=5.0, theta_deg=45.0,
                        scaling="fixed-energy", level_db=20.0)
    return ExperimentConfig(name="fig1", axis="M", grid=M_SINGLE, base=base,
                            series=(("LOS", ()), ("FF", (("scheme", "FF"),))),
                            trials=10000, prelog="exclude")


def _fig2():
    base = ScenarioSpec(kind="single-user", N=10, beta=None, kappa_db=5.0, angles="random",
                        scaling="fixed-energy", level_db=20.0)
    return ExperimentConfig(name="fig2", axis="M", grid=M_SINGLE, base=base,
                            series=(("LOS", ()), ("FF", (("scheme", "FF"),))),
                            trials=2000, drops=50, prelog="exclude")


def _fig3():
    base = ScenarioSpec(kind="single-user", N=10, beta=None, kappa_db=5.0, scaling="fixed-power")
    series = tuple((f"p_u={p:g}dB", (("level_db", float(p)),)) for p in (-10, 0, 10))
    return ExperimentConfig(name="fig3", axis="M", grid=M_SINGLE[:6], base=base, series=series,
                            trials=2000, drops=50)


def _fig4():
    base = ScenarioSpec(kind="single-user", N=10, beta=None, scaling="fixed-energy", level_db=20.0)
    series = tuple((f"kappa={k:g}dB", (("kappa_db", float(k)),)) for k in (-5, 0, 5, 10))
    return ExperimentConfig(name="fig4", axis="M", grid=M_SINGLE[:6], base=base, series=series,
                            trials=2000, drops=50)


def _fig5():
    base = ScenarioSpec(kind="single-user", beta=None, kappa_db=5.0, scaling="fixed-energy", level_db=20.0)
    series = tuple((f"N={n}", (("N", n),)) for n in (1, 10))
    return ExperimentConfig(name="fig5", axis="M", grid=M_SINGLE[:6], base=base, series=series,
                            trials=2000, drops=50)


def _fig6():
    base = ScenarioSpec(kind="uplink", N=3, K=10, beta=BETA, kappa_db=5.0, angles="formula",
                        scaling="fixed-energy")
    series = tuple((f"{det} E_u={e}dB", (("detector", det), ("level_db", float(e))))
                   for e in (30, 20, 10) for det in ("MRC", "ZF", "MMSE"))
    return ExperimentConfig(name="fig6", axis="M", grid=M_UPLINK, base=base, series=series,
                            trials=1000, report="sum")


def _fig7():
    base = ScenarioSpec(kind="uplink", N=3, beta=BETA, kappa_db=5.0, angles="formula",
                        scaling="fixed-energy", level_db=20.0)
    series = tuple((f"{scheme} K={k}", (("K", k), ("scheme", scheme)))
                   for k in (50, 10, 2) for scheme in ("LOS", "FF"))
    return ExperimentConfig(name="fig7", axis="M", grid=M_LARGE, base=base, series=series,
                            trials=500, report="sum", prelog="exclude")


def _fig8():
    base = ScenarioSpec(kind="uplink", M=20, K=10, beta=BETA, kappa_db=5.0, angles="random",
                        scaling="fixed-energy", level_db=20.0)
    return ExperimentConfig(name="fig8", axis="N", grid=(1, 2, 5, 10, 20, 50, 100), base=base,
                            trials=500, drops=20)


def _fig9():
    base = ScenarioSpec(kind="downlink", N=2, beta=BETA, kappa_db=5.0, angles="random",
                        scaling="downlink-energy", level_db=10.0, iota=0.5)
    series = tuple((f"alpha={a:g}", (("alpha", a),)) for a in (0.5, 0.75, 1.0))
    return ExperimentConfig(name="fig9", axis="M", grid=(60, 100, 200, 300, 400, 600), base=base,
                            series=series, trials=100, drops=5)


def _fig10():
    base = ScenarioSpec(kind="downlink", N=10, K=10, beta=BETA, angles="random",
                        scaling="downlink-energy", level_db=20.0)
    series = tuple((f"kappa=5dB g_b={g:g}", (("kappa_db", 5.0), ("g_b", g))) for g in (0.0, 0.3, 0.6, 0.9))
    series += tuple((f"kappa=-10dB g_b={gb:g} g_u={gu:g}", (("kappa_db", -10.0), ("g_b", gb), ("g_u", gu)))
                    for gb, gu in ((0.0, 0.0), (0.0, 0.5), (0.5, 0.0), (0.5, 0.5)))
    return ExperimentConfig(name="fig10", axis="M", grid=(20, 50, 100, 150, 200), base=base,
                            series=series, trials=500, drops=10)


def _fig11():
    base = ScenarioSpec(kind="downlink", N=3, K=10, beta=BETA, kappa_db=5.0, d_k=0.3, angles="random",
                        scaling="downlink-energy", level_db=20.0)
    series = tuple((f"d={d:g}", (("d", d),)) for d in (0.05, 0.3, 2.4, 24.0))
    series += (
        ("d=0.05 g_b=0.5", (("d", 0.05), ("g_b", 0.5))),
        ("d_k=0.01 g_b=0.5 g_u=0.5", (("d_k", 0.01), ("g_b", 0.5), ("g_u", 0.5))),
        ("d=24 g_b=0.5", (("d", 24.0), ("g_b", 0.5))),
    )
    return ExperimentConfig(name="fig11", axis="M", grid=M_LARGE, base=base, series=series,
                            trials=500, drops=10)


PRESETS = {f"fig{i}": f for i, f in enumerate(
    (_fig1, _fig2, _fig3, _fig4, _fig5, _fig6, _fig7, _fig8, _fig9, _fig10, _fig11), start=1)}


def preset_names():
    return list(PRESETS)


def preset(name):
    """Fresh :class:`~losmimo.config.ExperimentConfig` for preset ``name``."""
    try:
        return PRESETS[name]()
    except KeyError:
        raise InvalidArgumentError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}") from None
