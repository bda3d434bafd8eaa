"""Deterministic synthetic N-Triples with known metric values.

Randomness comes from a SplitMix64 stream: value ``i`` (0-based) of the
stream seeded with ``seed`` is ``mix(seed + (i + 1) * 0x9E3779B97F4A7C15)``
modulo 2**64, where ``mix`` is the standard SplitMix64 finalizer. The
generator draws consecutive blocks of that stream; the triple order is the
stable argsort of one block.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .rdf import XSD

GOLDEN = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1

INTERNAL_BASE = "http://data.example.org/"
RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label"
DCT_LICENSE = "http://purl.org/dc/terms/license"
OWL_SAME_AS = "http://www.w3.org/2002/07/owl#sameAs"
CUSTOM_DATATYPE = INTERNAL_BASE + "datatype/code"
LONG_PAD = "segment/" * 12


def splitmix64(seed: int, index: int) -> int:
    """Single stream value; reference for :func:`splitmix64_block`."""
    z = (seed + (index + 1) * GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64_block(seed: int, start: int, count: int) -> np.ndarray:
    """Stream values ``start .. start+count-1`` as uint64 (wrapping arithmetic)."""
    with np.errstate(over="ignore"):
        idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
        z = np.uint64(seed & MASK64) + idx * np.uint64(GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorProfile:
    seed: int = 42
    n_triples: int = 1000
    fraction_external_links: float = 0.1
    fraction_literals: float = 0.3
    fraction_malformed_typed_literals: float = 0.05
    include_license: bool = True
    long_uri_fraction: float = 0.01

    def validate(self) -> None:
        if not 0 <= self.seed <= MASK64:
            raise ProfileError("seed must be an unsigned 64-bit integer")
        if self.n_triples < 0:
            raise ProfileError("n_triples must be >= 0")
        for name in (
            "fraction_external_links",
            "fraction_literals",
            "fraction_malformed_typed_literals",
            "long_uri_fraction",
        ):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ProfileError(f"{name} must lie in [0, 1]")
        c = self.counts()
        if c["license"] + c["external_links"] + c["literals"] > self.n_triples:
            raise ProfileError("license, external-link and literal triples exceed n_triples")

    def counts(self) -> dict[str, int]:
        n = self.n_triples
        literals = round(self.fraction_literals * n)
        malformed = round(self.fraction_malformed_typed_literals * literals)
        ext = round(self.fraction_external_links * n)
        lic = 1 if self.include_license and n > 0 else 0
        return {
            "license": lic,
            "external_links": ext,
            "literals": literals,
            "malformed_literals": malformed,
            "long_uris": round(self.long_uri_fraction * n),
            "plain": n - lic - ext - literals,
        }


# categories
_PLAIN, _LICENSE, _EXT, _LIT, _BAD = range(5)

_VALID_LITERALS = [
    lambda k: f'"value {k}"',
    lambda k: f'"label {k}"@en',
    lambda k: f'"{k}"^^<{XSD}integer>',
    lambda k: f'"{k}.5"^^<{XSD}decimal>',
    lambda k: f'"{"true" if k % 2 else "false"}"^^<{XSD}boolean>',
    lambda k: f'"20{k % 90 + 10:02d}-0{k % 9 + 1}-1{k % 9}"^^<{XSD}date>',
    lambda k: f'"{k}.25E3"^^<{XSD}double>',
    lambda k: f'"C{k}"^^<{CUSTOM_DATATYPE}>',
]
_BAD_LITERALS = [
    lambda k: f'"abc{k}"^^<{XSD}int>',
    lambda k: f'"{k}.5.3"^^<{XSD}decimal>',
    lambda k: f'"maybe{k}"^^<{XSD}boolean>',
    lambda k: f'"2020-13-{k % 20 + 10}"^^<{XSD}date>',
    lambda k: f'"{k}e"^^<{XSD}double>',
]
# every 4th valid literal is a label; the rest use vocabulary predicates
_LABEL_EVERY = 4


def _entity(k: int, long: bool) -> str:
    return f"<{INTERNAL_BASE}{LONG_PAD if long else ''}resource/r{k}>"


def _external(k: int, long: bool) -> str:
    return f"<http://ext{k % 7}.example.net/{LONG_PAD if long else ''}thing/x{k}>"


def generate_lines(profile: GeneratorProfile):
    """Yield N-Triples lines (with trailing newline) and finally nothing else."""
    profile.validate()
    c = profile.counts()
    n = profile.n_triples
    if n == 0:
        return
    seed = profile.seed
    cats = np.empty(n, dtype=np.int8)
    edges = np.cumsum([0, c["license"], c["external_links"], c["literals"] - c["malformed_literals"], c["malformed_literals"]])
    cats[:] = _PLAIN
    cats[edges[0] : edges[1]] = _LICENSE
    cats[edges[1] : edges[2]] = _EXT
    cats[edges[2] : edges[3]] = _LIT
    cats[edges[3] : edges[4]] = _BAD
    order = np.argsort(splitmix64_block(seed, 0, n), kind="stable")
    cats = cats[order]
    rnd = splitmix64_block(seed, n, n)
    n_entities = max(1, n // 4)
    subjects = (rnd % np.uint64(n_entities)).tolist()
    objects = ((rnd >> np.uint64(20)) % np.uint64(n_entities)).tolist()
    flavor = (rnd >> np.uint64(40)).tolist()
    long_count = c["long_uris"]
    vocab = [f"<{INTERNAL_BASE}vocab/p{i}>" for i in range(16)]
    label_p = f"<{RDFS_LABEL}>"
    lic_p = f"<{DCT_LICENSE}>"
    same_as = f"<{OWL_SAME_AS}>"
    links_to = f"<{INTERNAL_BASE}vocab/linksTo>"
    lit_seen = 0
    bad_seen = 0
    for i, cat in enumerate(cats.tolist()):
        long = i < long_count
        s_k, o_k, f = subjects[i], objects[i], flavor[i]
        if cat == _PLAIN:
            line = f"{_entity(s_k, long)} {vocab[f % 16]} {_entity(o_k, False)} .\n"
        elif cat == _LICENSE:
            line = f"{_entity(s_k, long)} {lic_p} <{INTERNAL_BASE}license/open> .\n"
        elif cat == _EXT:
            pred = same_as if f % 3 == 0 else links_to
            if f & 1:
                line = f"{_external(s_k, long)} {pred} {_entity(o_k, False)} .\n"
            else:
                line = f"{_entity(s_k, long)} {pred} {_external(o_k, False)} .\n"
        elif cat == _LIT:
            kind = lit_seen % len(_VALID_LITERALS)
            pred = label_p if lit_seen % _LABEL_EVERY == 0 else vocab[f % 16]
            line = f"{_entity(s_k, long)} {pred} {_VALID_LITERALS[kind](o_k)} .\n"
            lit_seen += 1
        else:
            kind = bad_seen % len(_BAD_LITERALS)
            line = f"{_entity(s_k, long)} {vocab[f % 16]} {_BAD_LITERALS[kind](o_k)} .\n"
            bad_seen += 1
        yield line


def expected_values(profile: GeneratorProfile) -> dict[str, float]:
    """Metric values implied by construction (internal prefix: INTERNAL_BASE)."""
    c = profile.counts()
    n = profile.n_triples
    valid_literals = c["literals"] - c["malformed_literals"]
    labels = (valid_literals + _LABEL_EVERY - 1) // _LABEL_EVERY
    if n == 0:
        return {"L1": 0.0, "L2": 0.0, "I2": 0.0, "U1": 0.0, "RC1": 0.0, "SV3": 0.0, "CN2": 0.0}
    return {
        "L1": 1.0 if c["license"] else 0.0,
        "L2": 0.0,
        "I2": c["external_links"] / n,
        "U1": labels / n,
        "RC1": c["long_uris"] / n,
        "SV3": float(c["malformed_literals"]),
        "CN2": c["literals"] / n,
    }


def manifest(profile: GeneratorProfile) -> dict:
    return {
        "profile": asdict(profile),
        "counts": profile.counts(),
        "context": {"internal_prefixes": [INTERNAL_BASE]},
        "expected": expected_values(profile),
    }


def generate_file(profile: GeneratorProfile, path, manifest_path=None) -> dict:
    """Write the dataset and its sidecar manifest (``<path>.manifest.json`` by default)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        buf = []
        for line in generate_lines(profile):
            buf.append(line)
            if len(buf) >= 65536:
                fh.write("".join(buf))
                buf.clear()
        fh.write("".join(buf))
    info = manifest(profile)
    with open(manifest_path or f"{path}.manifest.json", "w", encoding="utf-8") as fh:
        json.dump(info, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return info
