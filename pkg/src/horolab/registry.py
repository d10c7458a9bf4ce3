"""Fixed label strings attached to verification reports.

Reports name the statement each check exercises through these labels so
that the wording is defined in exactly one place.
"""

CITATIONS = {
    "riccati_envelope": "Lemma 2.2",
    "boundary_norm": "Cor 2.3",
    "c1": "Lemma 2.4 (c1)",
    "c2": "Lemma 2.4 (c2)",
    "c3": "Lemma 2.4 (c3)",
    "stransform": "eq. (Stransform)",
    "wronskian": "Wronskian constancy",
    "hopf": "Prop 2.1",
    "decay": "Prop 2.6",
    "contraction": "Cor 2.7",
    "lipschitz": "Thm 2.9",
    "dini": "Lemma 3.1",
    "detD": "Prop 3.2",
    "hddh": "eq. (HD+DH)",
    "ar": "Lemma 3.3",
    "anosov": "Sec 4.2 Anosov criterion",
    "expdiv": "eq. (expdiv)",
    "thin": "Sec 4.2 thin triangles",
    "purely_exponential": "Def 4.3",
    "lower_bound": "Lemma 4.4",
    "rank_detection": "Sec 4.4 rank-one detection",
    "slab": "Cor 4.6",
    "equivalence": "Thm 1.3",
    "bounded_asymptote": "Lemma 5.2",
    "cheeger_lower": "Prop 5.3",
    "cheeger": "Thm 5.4",
    "space_form": "Riccati fixed points",
    "symmetric_model": "rank-one symmetric model",
    "determinism": "determinism contract",
}


def cite(*keys):
    """Join the labels for ``keys``; unknown keys raise ``KeyError``."""
    return "; ".join(CITATIONS[k] for k in keys)
