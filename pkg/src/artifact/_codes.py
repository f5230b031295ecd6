"""Integer codes shared by the compiled and pure-Python risk kernels."""

PHI_KINDS = (
    "zero-one",
    "identity",
    "linear",
    "hinge",
    "modulus",
    "squared",
    "truncated-square",
    "exponential",
    "logistic",
    "sigmoid",
    "kink",
    "power",
    "power-plus",
    "affine-squared",
)
PHI_CODE = {name: i for i, name in enumerate(PHI_KINDS)}

# psi kinds used by the Zhang family; "phi-neg" is t -> phi(-t), "neg-phi" is t -> -phi(t)
PSI_KINDS = ("neg-linear", "neg-log", "neg-power", "phi-neg", "neg-phi")
PSI_CODE = {name: i for i, name in enumerate(PSI_KINDS)}

F_KINDS = ("none", "identity", "log")
F_CODE = {name: i for i, name in enumerate(F_KINDS)}

FAMILIES = ("WW", "CS", "LLW", "Zhang", "RRKA", "ZZH", "Liu", "BSKV", "LR")
FAMILY_CODE = {name: i for i, name in enumerate(FAMILIES)}

# adjustment l(s) in the pseudo-risk
ADJ_NONE, ADJ_SUM_PHI, ADJ_F_SUM_PHI = 0, 1, 2
