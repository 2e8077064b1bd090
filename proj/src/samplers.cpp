#include "exitflow/samplers.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/random/normal_distribution.hpp>

namespace exitflow {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept
{
    const std::uint64_t p = std::uint64_t(a) * std::uint64_t(b);
    hi = std::uint32_t(p >> 32);
    lo = std::uint32_t(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) noexcept
{
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t trajectory_index) noexcept
    : seed_(master_seed), index_(trajectory_index)
{
}

void RngStream::refill() noexcept
{
    const std::array<std::uint32_t, 4> ctr{std::uint32_t(block_), std::uint32_t(block_ >> 32),
                                           std::uint32_t(index_), std::uint32_t(index_ >> 32)};
    const std::array<std::uint32_t, 2> key{std::uint32_t(seed_), std::uint32_t(seed_ >> 32)};
    const auto out = philox4x32_10(ctr, key);
    buffer_[0] = (std::uint64_t(out[1]) << 32) | out[0];
    buffer_[1] = (std::uint64_t(out[3]) << 32) | out[2];
    ++block_;
    cursor_ = 0;
}

double uniform01(RngStream& stream) noexcept
{
    return double(stream() >> 11) * 0x1.0p-53;
}

double standard_normal(RngStream& stream)
{
    boost::random::normal_distribution<double> normal;
    return normal(stream);
}

void normal_vec(RngStream& stream, Eigen::Ref<Eigen::VectorXd> out)
{
    boost::random::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = normal(stream);
}

Eigen::VectorXd normal_vec(RngStream& stream, Eigen::Index dim)
{
    Eigen::VectorXd out(dim);
    normal_vec(stream, out);
    return out;
}

int binary(RngStream& stream) noexcept
{
    return (stream() >> 63) ? 1 : -1;
}

void sphere_uniform(RngStream& stream, Eigen::Ref<Eigen::VectorXd> out)
{
    for (;;) {
        normal_vec(stream, out);
        const double norm = out.norm();
        if (norm >= 1e-300) {
            out /= norm;
            return;
        }
    }
}

Eigen::VectorXd sphere_uniform(RngStream& stream, Eigen::Index dim)
{
    Eigen::VectorXd out(dim);
    sphere_uniform(stream, out);
    return out;
}

double inverse_gaussian(RngStream& stream, double gamma, double delta)
{
    if (!(gamma > 0.0) || !(delta > 0.0))
        throw std::invalid_argument("inverse_gaussian: gamma and delta must be positive");
    const double z = standard_normal(stream);
    const double chi = z * z;
    // r = delta + delta/(2 gamma) (delta chi - s), s = sqrt(4 delta gamma chi + delta^2 chi^2),
    // rewritten without the cancellation in (delta chi - s).
    const double dchi = delta * chi;
    const double s = std::sqrt(dchi * (4.0 * gamma + dchi));
    const double r = chi > 0.0 ? 4.0 * delta * gamma * dchi / ((s + dchi) * (s + dchi)) : delta;
    const double u = uniform01(stream);
    if (u < delta / (delta + r)) return r;
    return delta * delta / r;
}

}  // namespace exitflow
