#pragma once

// Signed-distance geometry for the three benchmark domain families.
//
// Every domain is described in local coordinates y = x - C:
//   ball      { |y| < R }
//   gouda     { |y| < R } minus the closed positive orthant
//   emmental  (0, L)^D minus the closed balls of radius L*sqrt(D)/3 centred at 0 and (L, ..., L)
//
// The signed distance is negative inside, zero on the boundary and positive outside; the
// normal is the outward unit normal at the nearest boundary point (the gradient of d).

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "exitflow/errors.hpp"

namespace exitflow {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using ConstVectorRef = std::type_identity_t<Eigen::Ref<const Vector<Scalar>>>;

template <typename Scalar>
struct BoundaryData {
    Scalar distance{};
    Vector<Scalar> normal;
    Vector<Scalar> projection;
};

enum class DomainKind { ball, gouda, emmental };

/// Immutable description of a benchmark domain in dimension D.
template <typename Scalar>
class Domain {
public:
    static Domain ball(Eigen::Index dim, Scalar radius, Vector<Scalar> center)
    {
        return Domain(DomainKind::ball, dim, radius, std::move(center));
    }

    /// Ball of radius R at the origin with the closed positive orthant removed, shifted by `shift`.
    static Domain gouda(Eigen::Index dim, Scalar radius, Vector<Scalar> shift)
    {
        return Domain(DomainKind::gouda, dim, radius, std::move(shift));
    }

    /// Cube [0, L]^D with two corner balls of radius L*sqrt(D)/3 removed, shifted by `shift`.
    static Domain emmental(Eigen::Index dim, Scalar side, Vector<Scalar> shift)
    {
        return Domain(DomainKind::emmental, dim, side, std::move(shift));
    }

    DomainKind kind() const noexcept { return kind_; }
    Eigen::Index dimension() const noexcept { return dim_; }
    /// Radius for ball/gouda, side length for emmental.
    Scalar size() const noexcept { return size_; }
    const Vector<Scalar>& center() const noexcept { return center_; }
    Scalar hole_radius() const noexcept { return size_ * std::sqrt(Scalar(dim_)) / Scalar(3); }

private:
    Domain(DomainKind kind, Eigen::Index dim, Scalar size, Vector<Scalar> center)
        : kind_(kind), dim_(dim), size_(size), center_(std::move(center))
    {
        if (dim_ < 1) throw ConfigError("domain dimension must be at least 1");
        if (!(size_ > Scalar(0)) || !std::isfinite(double(size_)))
            throw ConfigError("domain radius/side must be positive and finite");
        if (center_.size() != dim_)
            throw ConfigError("domain center has " + std::to_string(center_.size()) +
                              " components, expected " + std::to_string(dim_));
    }

    DomainKind kind_;
    Eigen::Index dim_;
    Scalar size_;
    Vector<Scalar> center_;
};

namespace detail {

template <typename Scalar>
constexpr Scalar degenerate_distance() { return Scalar(1e-14); }

template <typename Scalar>
void check_dimension(const Domain<Scalar>& domain, Eigen::Index n)
{
    if (n != domain.dimension())
        throw ConfigError("point has " + std::to_string(n) + " components, domain dimension is " +
                          std::to_string(domain.dimension()));
}

template <typename Scalar>
void prepare(BoundaryData<Scalar>* out, Eigen::Index dim)
{
    if (out->normal.size() != dim) out->normal.resize(dim);
    if (out->projection.size() != dim) out->projection.resize(dim);
}

template <bool Full, typename Scalar>
Scalar ball_distance(const Domain<Scalar>& dom, const Eigen::Ref<const Vector<Scalar>>& x,
                     BoundaryData<Scalar>* out)
{
    const Scalar r = (x - dom.center()).norm();
    const Scalar d = r - dom.size();
    if constexpr (Full) {
        if (r > Scalar(0)) {
            out->normal = (x - dom.center()) / r;
        } else {
            out->normal.setZero();
            out->normal(0) = Scalar(1);
        }
        out->projection = dom.center() + dom.size() * out->normal;
        out->distance = d;
    }
    return d;
}

template <bool Full, typename Scalar>
Scalar gouda_distance(const Domain<Scalar>& dom, const Eigen::Ref<const Vector<Scalar>>& x,
                      BoundaryData<Scalar>* out)
{
    const Eigen::Index dim = dom.dimension();
    const Scalar radius = dom.size();
    const auto& c = dom.center();

    Scalar r2 = 0;
    Scalar neg2 = 0;
    bool in_orthant = true;
    for (Eigen::Index i = 0; i < dim; ++i) {
        const Scalar yi = x(i) - c(i);
        r2 += yi * yi;
        if (yi < Scalar(0)) {
            neg2 += yi * yi;
            in_orthant = false;
        }
    }
    const Scalar r = std::sqrt(r2);

    if (r < radius && !in_orthant) {
        const Scalar to_sphere = radius - r;
        const Scalar to_orthant = std::sqrt(neg2);
        const bool sphere_nearest = to_sphere <= to_orthant;
        const Scalar d = -(sphere_nearest ? to_sphere : to_orthant);
        if constexpr (Full) {
            out->distance = d;
            if (sphere_nearest) {
                out->normal = (x - c) / r;
                out->projection = c + radius * out->normal;
            } else {
                for (Eigen::Index i = 0; i < dim; ++i) {
                    const Scalar yi = x(i) - c(i);
                    out->normal(i) = yi < Scalar(0) ? -yi / to_orthant : Scalar(0);
                    out->projection(i) = c(i) + std::max(yi, Scalar(0));
                }
            }
        }
        return d;
    }

    // Outside: Omega-bar is the union over i of the half-balls {|y| <= R, y_i <= 0}.
    enum class Feature { radial, face, rim };
    Scalar best2 = std::numeric_limits<Scalar>::infinity();
    Eigen::Index best_i = 0;
    Feature best_feature = Feature::radial;
    bool radial_seen = false;
    for (Eigen::Index i = 0; i < dim; ++i) {
        const Scalar yi = x(i) - c(i);
        Scalar cand2;
        Feature feature;
        if (yi <= Scalar(0)) {
            if (radial_seen) continue;
            radial_seen = true;
            const Scalar gap = std::max(r - radius, Scalar(0));
            cand2 = gap * gap;
            feature = Feature::radial;
        } else {
            const Scalar rest2 = std::max(r2 - yi * yi, Scalar(0));
            if (rest2 <= radius * radius) {
                cand2 = yi * yi;
                feature = Feature::face;
            } else {
                const Scalar gap = std::sqrt(rest2) - radius;
                cand2 = yi * yi + gap * gap;
                feature = Feature::rim;
            }
        }
        if (cand2 < best2) {
            best2 = cand2;
            best_i = i;
            best_feature = feature;
        }
    }
    const Scalar d = std::sqrt(best2);
    if constexpr (Full) {
        out->distance = d;
        auto& p = out->projection;
        switch (best_feature) {
        case Feature::radial:
            if (r > radius) p = c + (x - c) * (radius / r);
            else p = x;
            break;
        case Feature::face:
            p = x;
            p(best_i) = c(best_i);
            break;
        case Feature::rim: {
            p = x - c;
            p(best_i) = Scalar(0);
            p *= radius / p.norm();
            p += c;
            break;
        }
        }
        if (d > degenerate_distance<Scalar>()) {
            // normalise the actual offset: d comes from a differently rounded formula
            out->normal = x - p;
            out->normal.normalize();
        } else if (best_feature == Feature::radial && r >= radius) {
            out->normal = (x - c) / r;
        } else if (best_feature == Feature::radial) {
            // on the carved faces: point into the orthant along the active coordinates
            out->normal.setZero();
            for (Eigen::Index i = 0; i < dim; ++i)
                if (x(i) - c(i) <= Scalar(0)) out->normal(i) = Scalar(1);
            out->normal.normalize();
        } else if (best_feature == Feature::face) {
            out->normal.setZero();
            out->normal(best_i) = Scalar(1);
        } else {
            out->normal = (p - c) / radius;
            out->normal(best_i) += Scalar(1);
            out->normal.normalize();
        }
    }
    return d;
}

// Maximises y^T z over {|z| = rho, 0 <= z_i <= side}.
template <typename Scalar>
void maximize_on_sphere_piece(const Vector<Scalar>& y, Scalar rho, Scalar side, Vector<Scalar>& z)
{
    const Eigen::Index dim = y.size();
    z.setZero(dim);
    std::vector<Eigen::Index> pos;
    std::vector<Eigen::Index> rest;
    for (Eigen::Index i = 0; i < dim; ++i) (y(i) > Scalar(0) ? pos : rest).push_back(i);

    const Scalar rho2 = rho * rho;
    const Scalar side2 = side * side;
    const auto npos = pos.size();

    if (side2 * Scalar(npos) >= rho2 && npos > 0) {
        std::sort(pos.begin(), pos.end(), [&](auto a, auto b) { return y(a) > y(b); });
        std::vector<Scalar> tail(npos + 1, Scalar(0));
        for (std::size_t k = npos; k-- > 0;) tail[k] = tail[k + 1] + y(pos[k]) * y(pos[k]);
        // z_i = min(t y_i, side) with the k largest components saturated
        for (std::size_t k = 0; k < npos; ++k) {
            const Scalar remaining = rho2 - Scalar(k) * side2;
            if (remaining <= Scalar(0) || tail[k] <= Scalar(0)) break;
            const Scalar t = std::sqrt(remaining / tail[k]);
            const bool saturated_ok = k == 0 || y(pos[k - 1]) * t >= side;
            const bool free_ok = y(pos[k]) * t <= side;
            if (saturated_ok && free_ok) {
                for (std::size_t j = 0; j < npos; ++j)
                    z(pos[j]) = j < k ? side : std::min(t * y(pos[j]), side);
                return;
            }
        }
    }

    // Positive components saturate; the remaining norm goes to the components closest to zero.
    for (auto i : pos) z(i) = side;
    Scalar remaining = std::max(rho2 - Scalar(npos) * side2, Scalar(0));
    std::sort(rest.begin(), rest.end(), [&](auto a, auto b) { return y(a) > y(b); });
    for (auto i : rest) {
        if (remaining <= Scalar(0)) break;
        if (remaining >= side2) {
            z(i) = side;
            remaining -= side2;
        } else {
            z(i) = std::sqrt(remaining);
            remaining = 0;
        }
    }
}

template <bool Full, typename Scalar>
Scalar emmental_distance(const Domain<Scalar>& dom, const Eigen::Ref<const Vector<Scalar>>& x,
                         BoundaryData<Scalar>* out)
{
    const Eigen::Index dim = dom.dimension();
    const Scalar side = dom.size();
    const Scalar rho = dom.hole_radius();
    const auto& c = dom.center();

    // Interior test and interior distance in one pass.
    Scalar r0sq = 0;
    Scalar r1sq = 0;
    bool in_cube = true;
    Scalar face_best = std::numeric_limits<Scalar>::infinity();
    Eigen::Index face_index = 0;
    for (Eigen::Index i = 0; i < dim; ++i) {
        const Scalar yi = x(i) - c(i);
        r0sq += yi * yi;
        r1sq += (yi - side) * (yi - side);
        if (!(yi > Scalar(0) && yi < side)) in_cube = false;
        if (yi < face_best) {
            face_best = yi;
            face_index = 2 * i;
        }
        if (side - yi < face_best) {
            face_best = side - yi;
            face_index = 2 * i + 1;
        }
    }
    const Scalar r0 = std::sqrt(r0sq);
    const Scalar r1 = std::sqrt(r1sq);

    if (in_cube && r0 > rho && r1 > rho) {
        // features: faces 0..2D-1, hole at the origin 2D, hole at (L,...,L) 2D+1
        Scalar best = face_best;
        Eigen::Index feature = face_index;
        if (r0 - rho < best) {
            best = r0 - rho;
            feature = 2 * dim;
        }
        if (r1 - rho < best) {
            best = r1 - rho;
            feature = 2 * dim + 1;
        }
        if constexpr (Full) {
            out->distance = -best;
            if (feature < 2 * dim) {
                const Eigen::Index i = feature / 2;
                const bool upper = feature % 2 == 1;
                out->normal.setZero();
                out->normal(i) = upper ? Scalar(1) : Scalar(-1);
                out->projection = x;
                out->projection(i) = c(i) + (upper ? side : Scalar(0));
            } else {
                const bool far_hole = feature == 2 * dim + 1;
                const Scalar offset = far_hole ? side : Scalar(0);
                const Scalar rb = far_hole ? r1 : r0;
                for (Eigen::Index i = 0; i < dim; ++i) {
                    const Scalar rel = x(i) - c(i) - offset;
                    out->normal(i) = -rel / rb;
                    out->projection(i) = c(i) + offset + rho * rel / rb;
                }
            }
        }
        return -best;
    }

    // Outside: nearest point of [0,L]^D minus the open holes. Candidates are face projections
    // that avoid both holes and the nearest points on the two spherical pieces inside the cube.
    Vector<Scalar> y = x - c;
    Vector<Scalar> z = y.cwiseMax(Scalar(0)).cwiseMin(side);
    const Scalar base2 = (y - z).squaredNorm();
    const Scalar z0sq = z.squaredNorm();
    const Scalar z1sq = (z.array() - side).matrix().squaredNorm();
    const Scalar rho2 = rho * rho;

    Scalar best2 = std::numeric_limits<Scalar>::infinity();
    Eigen::Index feature = 0;
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (int upper = 0; upper < 2; ++upper) {
            const Scalar s = upper ? side : Scalar(0);
            const Scalar d2 = base2 - (y(i) - z(i)) * (y(i) - z(i)) + (y(i) - s) * (y(i) - s);
            const Scalar p0 = z0sq - z(i) * z(i) + s * s;
            const Scalar p1 = z1sq - (z(i) - side) * (z(i) - side) + (s - side) * (s - side);
            if (p0 >= rho2 && p1 >= rho2 && d2 < best2) {
                best2 = d2;
                feature = 2 * i + upper;
            }
        }
    }
    Vector<Scalar> piece(dim);
    Vector<Scalar> hole_point[2];
    for (int b = 0; b < 2; ++b) {
        const Vector<Scalar> yb = b == 0 ? y : Vector<Scalar>((side - y.array()).matrix());
        maximize_on_sphere_piece(yb, rho, side, piece);
        const Scalar d2 = (yb - piece).squaredNorm();
        hole_point[b] = b == 0 ? piece : Vector<Scalar>((side - piece.array()).matrix());
        if (d2 < best2) {
            best2 = d2;
            feature = 2 * dim + b;
        }
    }
    const Scalar d = std::sqrt(std::max(best2, Scalar(0)));
    if constexpr (Full) {
        out->distance = d;
        Vector<Scalar> p(dim);
        if (feature < 2 * dim) {
            const Eigen::Index i = feature / 2;
            p = z;
            p(i) = feature % 2 == 1 ? side : Scalar(0);
        } else {
            p = hole_point[feature - 2 * dim];
        }
        if (d > degenerate_distance<Scalar>()) {
            out->normal = (y - p) / d;
        } else if (feature < 2 * dim) {
            out->normal.setZero();
            out->normal(feature / 2) = feature % 2 == 1 ? Scalar(1) : Scalar(-1);
        } else {
            const Scalar offset = feature == 2 * dim ? Scalar(0) : side;
            out->normal = ((offset - p.array()) / rho).matrix();
        }
        out->projection = p + c;
    }
    return d;
}

template <bool Full, typename Scalar>
Scalar dispatch(const Domain<Scalar>& dom, const Eigen::Ref<const Vector<Scalar>>& x,
                BoundaryData<Scalar>* out)
{
    check_dimension(dom, x.size());
    if constexpr (Full) prepare(out, dom.dimension());
    switch (dom.kind()) {
    case DomainKind::ball: return ball_distance<Full>(dom, x, out);
    case DomainKind::gouda: return gouda_distance<Full>(dom, x, out);
    case DomainKind::emmental: return emmental_distance<Full>(dom, x, out);
    }
    return Scalar(0);
}

}  // namespace detail

/// Signed distance only; cheaper than boundary_data() for interior points.
template <typename Scalar>
Scalar signed_distance(const Domain<Scalar>& domain, ConstVectorRef<Scalar> x)
{
    return detail::dispatch<false, Scalar>(domain, x, nullptr);
}

/// Fills `out` with distance, outward normal and nearest boundary point, reusing its storage.
template <typename Scalar>
void boundary_data(const Domain<Scalar>& domain, ConstVectorRef<Scalar> x, BoundaryData<Scalar>& out)
{
    detail::dispatch<true, Scalar>(domain, x, &out);
}

template <typename Scalar>
BoundaryData<Scalar> boundary_data(const Domain<Scalar>& domain, ConstVectorRef<Scalar> x)
{
    BoundaryData<Scalar> out;
    boundary_data(domain, x, out);
    return out;
}

template <typename Scalar>
bool contains(const Domain<Scalar>& domain, ConstVectorRef<Scalar> x)
{
    return signed_distance(domain, x) < Scalar(0);
}

}  // namespace exitflow
