#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include <Eigen/Dense>

namespace exitflow {

/// Philox4x32-10 block function (Salmon et al.), the counter-based core of RngStream.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                          std::array<std::uint32_t, 2> key) noexcept;

/// Random stream for one trajectory.
///
/// The stream is a pure function of (master_seed, trajectory_index, position): the seed is the
/// Philox key and the trajectory index occupies the upper half of the 128-bit counter, so any
/// substream can be created or replayed independently of every other one.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t master_seed, std::uint64_t trajectory_index) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        if (cursor_ == 2) refill();
        return buffer_[cursor_++];
    }

    std::uint64_t master_seed() const noexcept { return seed_; }
    std::uint64_t trajectory_index() const noexcept { return index_; }

private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t index_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int cursor_ = 2;
};

/// Uniform on [0, 1) with 53 random bits.
double uniform01(RngStream& stream) noexcept;

/// Standard normal (ziggurat).
double standard_normal(RngStream& stream);

/// Fills `out` with independent standard normals.
void normal_vec(RngStream& stream, Eigen::Ref<Eigen::VectorXd> out);

Eigen::VectorXd normal_vec(RngStream& stream, Eigen::Index dim);

/// +1 or -1 with equal probability.
int binary(RngStream& stream) noexcept;

/// Uniform on the unit (D-1)-sphere by normalising a Gaussian vector.
void sphere_uniform(RngStream& stream, Eigen::Ref<Eigen::VectorXd> out);

Eigen::VectorXd sphere_uniform(RngStream& stream, Eigen::Index dim);

/// Inverse Gaussian with mean `delta` and variance delta^3 / gamma (Michael-Schucany-Haas).
double inverse_gaussian(RngStream& stream, double gamma, double delta);

}  // namespace exitflow
