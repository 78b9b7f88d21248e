"""Synthetic panel CSV builders shared by the CLI and acceptance tests.

Firms draw a persistent base productivity from a GB2 law; each year
multiplies it by a small lognormal shock.  Worker counts scale like
c**weight_exp, so the worker-weighted density is the GB2 with
(mu - weight_exp, nu + weight_exp) and the same (q, c1): choosing
weight_exp < 0 yields a superstatistical panel (mu_w > mu_f), and
weight_exp > 0 a negative-temperature one.
"""

import numpy as np

from prodstat import gb2

HEADER = "firm_id,year,sector_code,sector_class,value_added,workers_eoy"


def write_panel(path, n_firms, mu, nu, weight_exp, seed,
                years=(1999, 2000, 2001), q=1.0, c1=1.0, base_workers=100.0,
                jitter=0.05, sector_class="M", n_sectors=5):
    rng = np.random.default_rng(seed)
    base = gb2.sample(gb2.Gb2Params(mu, nu, q, c1), n_firms, rng)
    rows = [HEADER]
    l_prev = None
    for year in years:
        c = base * np.exp(jitter * rng.standard_normal(n_firms))
        l_now = np.maximum(1, np.round(base_workers * c ** weight_exp)).astype(int)
        for i in range(n_firms):
            l_bar = l_now[i] if l_prev is None else 0.5 * (l_now[i] + l_prev[i])
            value = float(c[i] * l_bar)
            rows.append(f"F{i:06d},{year},{i % n_sectors + 1},{sector_class},"
                        f"{value!r},{int(l_now[i])}")
        l_prev = l_now.copy()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(rows) + "\n")
    return path


def write_sector_panel(path, seed, exponent=1.6, n_sectors=26,
                       firms_per_sector=40, years=(1999, 2000)):
    """26 sector levels laid out as Pareto quantiles of the given tail
    exponent, with lognormal firm-level spread around each level."""
    rng = np.random.default_rng(seed)
    rows = [HEADER]
    for j in range(1, n_sectors + 1):
        level = ((j - 0.5) / n_sectors) ** (-1.0 / exponent)
        for i in range(firms_per_sector):
            c_base = level * float(np.exp(0.1 * rng.standard_normal()))
            workers = int(rng.integers(5, 40))
            for year in years:
                value = float(c_base * workers)
                rows.append(f"S{j:02d}F{i:03d},{year},{j},M,{value!r},{workers}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(rows) + "\n")
    return path
