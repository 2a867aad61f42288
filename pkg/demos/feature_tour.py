"""Tour of the acoustic features on synthetic voices.

Synthesizes a clean voice, a perturbed voice, and a noisy voice, then
prints every feature side by side so the direction of each one under
degradation is visible at a glance. Run with no arguments.
"""

import numpy as np

from sevscore import synth
from sevscore.audio import AudioClip
from sevscore.features import cpp, hnr, jitter, shimmer, sigma_f0, voicing_ratio, wada_snr
from sevscore.pitch import estimate_pitch_track, extract_cycles


def feature_row(name, samples, rate=16000):
    clip = AudioClip(np.asarray(samples, dtype=np.float64), rate)
    track = estimate_pitch_track(clip)
    cycles = extract_cycles(clip, track)
    return {
        "voice": name,
        "jitter": jitter(cycles).value,
        "shimmer": shimmer(cycles).value,
        "sigma_f0": sigma_f0(track).value,
        "voicing_ratio": voicing_ratio(track).value,
        "hnr": hnr(clip, track).value,
        "wada_snr": wada_snr(clip).value,
        "cpp": cpp(clip, name).value,
    }


def main():
    clean = synth.pulse_voice(2.0, 110.0, jitter_eps=0.003, shimmer_eps=0.003,
                              seed=1, pulse_width=0.004)
    rough = synth.pulse_voice(2.0, 110.0, jitter_eps=0.03, shimmer_eps=0.03,
                              seed=1, pulse_width=0.004)
    noisy = synth.add_noise(clean.samples, snr_db=10.0, seed=2)

    rows = [
        feature_row("clean", clean.samples),
        feature_row("rough", rough.samples),
        feature_row("noisy", noisy),
    ]

    names = [k for k in rows[0] if k != "voice"]
    print(f"{'feature':<14}" + "".join(f"{r['voice']:>10}" for r in rows))
    for name in names:
        cells = "".join(f"{r[name]:>10.4f}" for r in rows)
        print(f"{name:<14}{cells}")

    print()
    print("Reading the table:")
    print("- jitter and shimmer track cycle perturbation, so the rough voice")
    print("  sits an order of magnitude above the clean one")
    print("- hnr and cpp drop sharply when additive noise comes in")
    print("- sigma_f0 looks inflated for the clean and rough voices: a single")
    print("  onset frame tracks at the search ceiling and, being a plain")
    print("  population spread, sigma_f0 is dominated by that one slip; under")
    print("  noise the same frame fails the voicing test and the spread")
    print("  collapses to the true sub-hertz value")
    print("- wada_snr calibrates absolute level against speech-shaped")
    print("  amplitude statistics, so on a sparse pulse train the absolute")
    print("  value is not meaningful; the severity study demo shows it")
    print("  tracking noise level across a corpus")
    print("- voicing_ratio stays near 1.0 for every variant because the")
    print("  underlying pulse train never stops")


if __name__ == "__main__":
    main()
