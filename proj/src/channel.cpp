#include "fbnoma/channel.hpp"

#include <cmath>

namespace fbnoma::sim {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 2> key,
                                        std::array<std::uint32_t, 4> counter) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        std::uint64_t p0 = static_cast<std::uint64_t>(M0) * counter[0];
        std::uint64_t p1 = static_cast<std::uint64_t>(M1) * counter[2];
        counter = {static_cast<std::uint32_t>(p1 >> 32) ^ counter[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ counter[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
        key[0] += W0;
        key[1] += W1;
    }
    return counter;
}

double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint32_t draw) {
    std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                        static_cast<std::uint32_t>(seed >> 32)};
    std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(stream),
                                        static_cast<std::uint32_t>(stream >> 32),
                                        draw, 0u};
    auto out = philox4x32(key, ctr);
    std::uint64_t bits =
        (static_cast<std::uint64_t>(out[0]) << 32) | static_cast<std::uint64_t>(out[1]);
    // 53-bit mantissa, offset by 2^-54 so the result is never 0 or 1
    return static_cast<double>(bits >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

double exponential(std::uint64_t seed, std::uint64_t stream, std::uint32_t draw) {
    return -std::log1p(-uniform01(seed, stream, draw));
}

double ChannelModel::pathloss() const {
    return pathloss_scale * std::pow(distance, -pathloss_exp);
}

double ChannelModel::mean_gain() const { return pathloss() / noise_w; }

std::pair<double, double> sample_channel(const ChannelModel& model,
                                         std::uint64_t seed,
                                         std::uint64_t realization) {
    double base = model.pathloss() / model.noise_w;
    if (model.fading_variance == 0.0) return {base, base};
    double f1 = model.fading_variance * exponential(seed, realization, 0);
    double f2 = model.fading_variance * exponential(seed, realization, 1);
    return {base * f1, base * f2};
}

} // namespace fbnoma::sim
