"""Named parameter bundles for the standard experiments.

All share r = 0.1, sigma = 0.2, T = 1, K = 100 and a rehedging interval of
0.01 years; c = 0.01, 0.02, 0.03 give Le close to 0.4, 0.8 and 1.2.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Preset:
    name: str
    c: float
    h: float
    d_tau: float
    order: int = 1
    variant: str = "v1"
    note: str = ""

    def settings(self) -> dict[str, str]:
        return {
            "c": repr(self.c),
            "h": repr(self.h),
            "d_tau": repr(self.d_tau),
            "order": str(self.order),
            "variant": self.variant,
        }


_COARSE = (0.1, 0.001)  # dtau/h = 0.01, dtau/h^2 = 0.1
_FINE = (0.0125, 0.000125)  # dtau/h = 0.01, dtau/h^2 = 0.8
_STABLE = (0.05, 0.00025)  # dtau/h = 0.005, dtau/h^2 = 0.1
_STABLE_FINE = (0.025, 0.0000625)  # dtau/h = 0.0025, dtau/h^2 = 0.1


def _p(name, c, mesh, order=1, variant="v1", note=""):
    return Preset(name, c, mesh[0], mesh[1], order, variant, note)


PRESETS: dict[str, Preset] = {
    p.name: p
    for p in [
        _p("linear-p1", 0.0, _STABLE, note="no transaction cost, P1; compare with the closed form"),
        _p("linear-p2", 0.0, _STABLE, order=2, note="no transaction cost, P2"),
        _p("linear-coarse", 0.0, _COARSE, note="no transaction cost, coarse P1 mesh"),
        _p("le04-coarse", 0.01, _COARSE, note="Le ~ 0.4, P1, coarse space-time mesh"),
        _p("le04-fine", 0.01, _FINE, note="Le ~ 0.4, P1, dtau/h^2 = 0.8"),
        _p("le04-p2-coarse", 0.01, _COARSE, order=2, note="Le ~ 0.4, P2 version 1"),
        _p("le04-p2-coarse-v2", 0.01, _COARSE, order=2, variant="v2", note="Le ~ 0.4, P2 version 2 (Mbar = M)"),
        _p("le04-p2-fine", 0.01, _FINE, order=2, note="Le ~ 0.4, P2 version 1, dtau/h^2 = 0.8"),
        _p("le04-p2-fine-v2", 0.01, _FINE, order=2, variant="v2", note="Le ~ 0.4, P2 version 2, dtau/h^2 = 0.8"),
        _p("le08-coarse", 0.02, _COARSE, note="Le ~ 0.8, P1, coarse space-time mesh"),
        _p("le08-fine", 0.02, _FINE, note="Le ~ 0.8, P1, dtau/h^2 = 0.8"),
        _p("le08-p2-coarse", 0.02, _COARSE, order=2, note="Le ~ 0.8, P2 version 1"),
        _p("le08-p2-coarse-v2", 0.02, _COARSE, order=2, variant="v2", note="Le ~ 0.8, P2 version 2"),
        _p("le12-p1-coarse", 0.03, _COARSE, note="Le ~ 1.2, P1, dtau/h^2 = 0.1"),
        _p("le12-p1-unstable", 0.03, _FINE, note="Le ~ 1.2, P1, dtau/h^2 = 0.8: oscillates"),
        _p("le12-p1-stable", 0.03, _STABLE, note="Le ~ 1.2, P1, dtau/h = 0.005, dtau/h^2 = 0.1"),
        _p("le12-p1-stable-fine", 0.03, _STABLE_FINE, note="Le ~ 1.2, P1, dtau/h = 0.0025, dtau/h^2 = 0.1"),
        _p("le12-p2-coarse", 0.03, _COARSE, order=2, note="Le ~ 1.2, P2, dtau/h^2 = 0.1"),
        _p("le12-p2-unstable", 0.03, _FINE, order=2, note="Le ~ 1.2, P2, dtau/h^2 = 0.8"),
        _p("le12-p2-stable", 0.03, _STABLE, order=2, note="Le ~ 1.2, P2, dtau/h = 0.005"),
        _p("le12-p2-stable-fine", 0.03, _STABLE_FINE, order=2, note="Le ~ 1.2, P2, dtau/h = 0.0025"),
    ]
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise KeyError(f"unknown preset {name!r}; known presets: {known}") from None


def preset_table() -> str:
    lines = [f"{'name':<22}{'c':>6}{'h':>9}{'d_tau':>11}{'order':>7}{'var':>5}  note"]
    for p in PRESETS.values():
        lines.append(f"{p.name:<22}{p.c:>6g}{p.h:>9g}{p.d_tau:>11g}{p.order:>7}{p.variant:>5}  {p.note}")
    return "\n".join(lines)
