// SPDX-License-Identifier: MIT

#include "dstep/signals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dstep {

double SignalSpec::operator()(std::int64_t t) const {
    switch (kind) {
        case Kind::kZero:
            return 0.0;
        case Kind::kConstant:
            return value;
        case Kind::kCosine: {
            const double arg =
                frequency * (static_cast<double>(t) + time_shift) + phase;
            return amplitude * std::cos(arg);
        }
        case Kind::kWindowedCosine: {
            const double shifted = static_cast<double>(t) + time_shift;
            if (!(static_cast<double>(window_start) < shifted &&
                  shifted <= static_cast<double>(window_end))) {
                return 0.0;
            }
            return amplitude * std::cos(frequency * shifted + phase);
        }
        case Kind::kSamples: {
            const std::int64_t idx = t - samples_start;
            if (idx < 0 || idx >= static_cast<std::int64_t>(samples.size())) {
                return 0.0;
            }
            return samples[static_cast<std::size_t>(idx)];
        }
    }
    return 0.0;
}

double SignalSpec::sup_bound() const {
    switch (kind) {
        case Kind::kZero:
            return 0.0;
        case Kind::kConstant:
            return std::abs(value);
        case Kind::kCosine:
        case Kind::kWindowedCosine:
            return std::abs(amplitude);
        case Kind::kSamples: {
            double bound = 0.0;
            for (double v : samples) bound = std::max(bound, std::abs(v));
            return bound;
        }
    }
    return 0.0;
}

bool SignalSpec::identically_zero() const {
    switch (kind) {
        case Kind::kZero:
            return true;
        case Kind::kConstant:
            return value == 0.0;
        case Kind::kCosine:
        case Kind::kWindowedCosine:
            return amplitude == 0.0;
        case Kind::kSamples:
            return std::all_of(samples.begin(), samples.end(),
                               [](double v) { return v == 0.0; });
    }
    return false;
}

void SignalSpec::validate() const {
    const double params[] = {value, amplitude, frequency, phase, time_shift};
    for (double p : params) {
        if (!std::isfinite(p)) {
            throw std::invalid_argument("SignalSpec: non-finite parameter");
        }
    }
    for (double v : samples) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("SignalSpec: non-finite sample");
        }
    }
    if (kind == Kind::kWindowedCosine && window_end < window_start) {
        throw std::invalid_argument("SignalSpec: empty window bounds");
    }
}

SignalSpec SignalSpec::zero() { return SignalSpec{}; }

SignalSpec SignalSpec::constant(double value) {
    SignalSpec s;
    s.kind = Kind::kConstant;
    s.value = value;
    return s;
}

SignalSpec SignalSpec::cosine(double amplitude, double frequency, double phase,
                              double time_shift) {
    SignalSpec s;
    s.kind = Kind::kCosine;
    s.amplitude = amplitude;
    s.frequency = frequency;
    s.phase = phase;
    s.time_shift = time_shift;
    return s;
}

SignalSpec SignalSpec::windowed_cosine(double amplitude, double frequency,
                                       std::int64_t window_start,
                                       std::int64_t window_end, double phase,
                                       double time_shift) {
    SignalSpec s;
    s.kind = Kind::kWindowedCosine;
    s.amplitude = amplitude;
    s.frequency = frequency;
    s.window_start = window_start;
    s.window_end = window_end;
    s.phase = phase;
    s.time_shift = time_shift;
    return s;
}

SignalSpec SignalSpec::from_samples(std::int64_t start,
                                    std::vector<double> values) {
    SignalSpec s;
    s.kind = Kind::kSamples;
    s.samples_start = start;
    s.samples = std::move(values);
    return s;
}

}  // namespace dstep
