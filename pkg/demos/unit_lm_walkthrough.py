"""Walkthrough of the acoustic-unit pipeline on controlled data.

Builds frame embeddings with a known cluster structure, trains a
codebook and an n-gram model on the resulting unit streams, and shows
that perplexity separates well-formed streams from scrambled ones. Run
with no arguments.
"""

import numpy as np

from sevscore.fmtx import FrameMatrix
from sevscore.unitlm import UnitLanguageModel, speechlm_score, train_unit_lm
from sevscore.units import UnitSequence, encode_units, train_codebook


def main():
    rng = np.random.default_rng(3)
    k = 12

    # frames drawn around k well-separated centers, visited in a fixed
    # cyclic order so the ideal unit stream is periodic
    centers = rng.normal(scale=12.0, size=(k, 6))
    visit_order = np.tile(np.arange(k), 200)
    frames = centers[visit_order] + rng.normal(scale=0.4, size=(2400, 6))
    fm = FrameMatrix(values=frames.astype(np.float32), hop=0.02)

    log = []
    cb = train_codebook([fm], k=k, seed=0, inertia_log=log)
    print(f"codebook: K={cb.K}, dim={cb.dim}")
    print("inertia per iteration:", " ".join(f"{v:.0f}" for v in log))

    seq = encode_units(fm, cb, dedup=False)
    print(f"first 24 units: {' '.join(map(str, seq.units[:24]))}")

    # the cluster labels are arbitrary, but the 12-step cycle survives
    segments = [seq.units[i * 240:(i + 1) * 240] for i in range(10)]
    lm = train_unit_lm([UnitSequence(units=s) for s in segments[:8]],
                       vocab_size=k, order=3, alpha=0.1)

    untrained = UnitLanguageModel(vocab_size=k, order=3, alpha=0.1)
    print(f"untrained perplexity (uniform over K+1): "
          f"{speechlm_score(UnitSequence(units=segments[8]), untrained).value:.4f}")

    held = UnitSequence(units=segments[8])
    print(f"held-out structured perplexity: {speechlm_score(held, lm).value:.4f}")

    scrambled = np.array(segments[8])
    rng.shuffle(scrambled)
    print(f"same units scrambled: "
          f"{speechlm_score(UnitSequence(units=scrambled), lm).value:.4f}")

    print()
    print("The structured stream scores close to 1 because the model has")
    print("seen every 3-gram in the cycle. Scrambling sends perplexity far")
    print("past the untrained ceiling: each context was seen in training,")
    print("so nearly all of its mass sits on the one continuation the cycle")
    print("allows, and the smoothed leftovers for everything else are tiny.")
    print("Severity scoring applies the same comparison to real unit")
    print("streams, with disordered speech playing the role of the")
    print("scrambled sequence.")


if __name__ == "__main__":
    main()
