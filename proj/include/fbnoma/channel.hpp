#ifndef FBNOMA_CHANNEL_HPP
#define FBNOMA_CHANNEL_HPP

#include <array>
#include <cstdint>
#include <utility>

// Counter-based random numbers (Philox4x32-10) and the Rayleigh/path-loss
// channel model of the experiments.  Draws are pure functions of
// (seed, stream, draw index), so parallel and serial sweeps produce
// identical realizations.

namespace fbnoma::sim {

// One 10-round Philox4x32 block.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 2> key,
                                        std::array<std::uint32_t, 4> counter);

// Uniform double strictly inside (0, 1) for a given (seed, stream, draw).
double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint32_t draw);

// Standard exponential (mean 1) via inversion.
double exponential(std::uint64_t seed, std::uint64_t stream, std::uint32_t draw);

struct ChannelModel {
    double distance = 10.0;        // meters
    double pathloss_exp = 2.0;     // alpha
    double pathloss_scale = 1e-3;  // 1e-3 * d^-alpha model
    double noise_w = 1e-14;        // -110 dBm
    double fading_variance = 1.0;  // E|fade|^2; 0 disables fading

    double pathloss() const;
    double mean_gain() const;      // pathloss / noise (E|fade|^2 = 1)
};

// Normalized gains (h1, h2) of one realization; |fade|^2 is Exp(1) scaled
// by fading_variance, or exactly 1 when fading_variance == 0.
std::pair<double, double> sample_channel(const ChannelModel& model,
                                         std::uint64_t seed,
                                         std::uint64_t realization);

} // namespace fbnoma::sim

#endif
