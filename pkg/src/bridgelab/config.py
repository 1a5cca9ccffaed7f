"""Parameter presets, read from an INI file (the shipped one by default)."""
import configparser
from importlib import resources

from .concrete import GmParams, LweParams, make_gm_scheme, make_lwe_scheme
from .errors import UnknownEntry
from .homomorphic import GswParams, make_gsw, trivial_fhe


def load_presets(path=None):
    parser = configparser.ConfigParser()
    parser.optionxform = str  # q and Q are different keys
    if path is None:
        parser.read_string(resources.files("bridgelab").joinpath("presets.ini").read_text())
    else:
        with open(path) as fh:
            parser.read_file(fh)
    return {name: {k: (v if k == "family" else int(v)) for k, v in parser[name].items()}
            for name in parser.sections()}


PRESETS = load_presets()


def preset(name, presets=None):
    presets = PRESETS if presets is None else presets
    if name not in presets:
        raise UnknownEntry(f"unknown preset {name!r}; known: {', '.join(sorted(presets))}")
    return presets[name]


def lwe_params(name, decryption="round", presets=None):
    p = preset(name, presets)
    if p["family"] not in ("lwe", "lwe-modswitch"):
        raise UnknownEntry(f"{name} is not an LWE preset")
    return LweParams(p["n"], p["q"], p["noise_bound"], decryption)


def gsw_params(name, presets=None):
    p = preset(name, presets)
    if p["family"] != "gsw":
        raise UnknownEntry(f"{name} is not a GSW preset")
    return GswParams(p["n"], p["log_q"], p["beta"], p["levels"])


def scheme(name, presets=None):
    """A SchemeDescriptor (or a homomorphic scheme for GSW and trivial)."""
    if name == "trivial":
        return trivial_fhe()
    p = preset(name, presets)
    fam = p["family"]
    if fam == "lwe":
        return make_lwe_scheme(lwe_params(name, presets=presets))
    if fam == "lwe-modswitch":
        return make_lwe_scheme(lwe_params(name, "threshold", presets))
    if fam == "gm":
        return make_gm_scheme(GmParams(p["p"], p["q_prime"]))
    if fam == "gsw":
        return make_gsw(gsw_params(name, presets))
    raise UnknownEntry(f"unknown family {fam!r}")


def base_scheme(name, presets=None):
    s = scheme(name, presets)
    return getattr(s, "base", s)


def hom_scheme(name, presets=None):
    s = scheme(name, presets)
    if not hasattr(s, "base"):
        raise UnknownEntry(f"{name} is not homomorphic")
    return s
