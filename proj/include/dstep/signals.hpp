// SPDX-License-Identifier: MIT
//
// Exogenous signal generators for references and disturbances.  The
// controller reads the reference with a d-step preview, so every kind must
// be evaluable at arbitrary future times (sample-based signals are zero
// outside their stored range and validated for coverage at config load).

#ifndef DSTEP_SIGNALS_HPP
#define DSTEP_SIGNALS_HPP

#include <cstdint>
#include <vector>

namespace dstep {

/**
 * A bounded scalar signal of integer time.
 *
 * kinds:
 *  - kZero            -- identically zero
 *  - kConstant        -- `value`
 *  - kCosine          -- amplitude*cos(frequency*(t + time_shift) + phase)
 *  - kWindowedCosine  -- the cosine above, but only when
 *                        window_start < t + time_shift <= window_end
 *                        (strict lower bound, inclusive upper bound)
 *  - kSamples         -- values[t - samples_start], zero outside the range
 *
 * `time_shift` lets a signal authored against a shifted clock be replayed
 * on the engine's clock without editing its window or phase.
 */
struct SignalSpec {
    enum class Kind { kZero, kConstant, kCosine, kWindowedCosine, kSamples };

    Kind kind = Kind::kZero;
    double value = 0.0;  // constant
    double amplitude = 0.0;
    double frequency = 0.0;
    double phase = 0.0;
    double time_shift = 0.0;
    std::int64_t window_start = 0;  // windowed cosine only
    std::int64_t window_end = 0;
    std::vector<double> samples;
    std::int64_t samples_start = 0;

    /** Evaluates the signal at time t. */
    double operator()(std::int64_t t) const;

    /** A finite bound on sup_t |signal(t)|. */
    double sup_bound() const;

    /** True when the signal is identically zero on every t. */
    bool identically_zero() const;

    /** Rejects non-finite parameters or sample values. */
    void validate() const;

    static SignalSpec zero();
    static SignalSpec constant(double value);
    static SignalSpec cosine(double amplitude, double frequency,
                             double phase = 0.0, double time_shift = 0.0);
    static SignalSpec windowed_cosine(double amplitude, double frequency,
                                      std::int64_t window_start,
                                      std::int64_t window_end,
                                      double phase = 0.0,
                                      double time_shift = 0.0);
    static SignalSpec from_samples(std::int64_t start,
                                   std::vector<double> values);
};

}  // namespace dstep

#endif  // DSTEP_SIGNALS_HPP
