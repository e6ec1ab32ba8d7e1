#include "pq/error.hpp"
#include "pq/parallel.hpp"
#include "pq/verify.hpp"

#include <cmath>
#include <random>

namespace pq {

namespace {

// splitmix64 finalizer: decorrelates (seed, index) before seeding the engine.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// std::uniform_real_distribution and std::normal_distribution are not
// specified bit-for-bit across standard libraries; these conversions are.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t index) : engine_(mix(seed ^ mix(index))) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Vector direction(int n) {
    Vector v(n);
    double norm = 0.0;
    while (norm < 1e-12) {
      for (int i = 0; i < n; ++i) v[i] = normal();
      norm = v.norm();
    }
    return v / norm;
  }

 private:
  std::mt19937_64 engine_;
};

constexpr std::uint64_t kLargeStream = 0x6c61726765ULL;

Vector axis(int n, int a) {
  Vector e = Vector::Zero(n);
  e[a] = 1.0;
  return e;
}

}  // namespace

void SampleConfig::validate() const {
  raise_if(count < 1, ErrorCode::InvalidArgument, "sample count must be at least 1");
  raise_if(!(xi_radius > 0.0 && u_radius > 0.0 && large_xi_radius > 0.0),
           ErrorCode::InvalidArgument, "sampling radii must be positive");
  raise_if(!(tolerance >= 0.0 && tolerance_strict >= 0.0), ErrorCode::InvalidArgument,
           "tolerances must be nonnegative");
  raise_if(!(u_floor > 0.0), ErrorCode::InvalidArgument, "u_floor must be positive");
}

int structured_sample_count(int dim) { return 8 + 6 * dim; }

std::vector<Sample> draw_samples(const Box& box, const SampleConfig& cfg) {
  cfg.validate();
  const int n = box.dim();
  const Vector center = box.center();
  std::vector<Sample> out;
  out.reserve(structured_sample_count(n) + cfg.count + cfg.count / 10);

  const Vector zero = Vector::Zero(n);
  out.push_back({center, 0.0, zero, axis(n, 0), axis(n, 0)});
  for (int a = 0; a < n; ++a) {
    for (double r : {1.0, cfg.xi_radius, cfg.large_xi_radius}) {
      for (double sign : {1.0, -1.0}) {
        const Vector xi = sign * r * axis(n, a);
        out.push_back({center, 0.0, xi, -xi, axis(n, a)});
      }
    }
  }
  const Vector diag = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  for (double r : {1.0, cfg.xi_radius, cfg.large_xi_radius}) {
    out.push_back({center, 0.0, r * diag, zero, diag});
  }
  for (double u : {cfg.u_radius, -cfg.u_radius}) {
    out.push_back({center, u, axis(n, 0), zero, axis(n, 0)});
  }
  out.push_back({box.lo, 0.0, zero, axis(n, 0), axis(n, 0)});
  out.push_back({box.hi, 0.0, zero, axis(n, 0), axis(n, 0)});

  const std::size_t structured = out.size();
  const std::size_t random = static_cast<std::size_t>(cfg.count);
  const std::size_t large = static_cast<std::size_t>(cfg.count / 10);
  out.resize(structured + random + large);

  parallel_for(random + large, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const bool is_large = k >= random;
      Stream rng(is_large ? cfg.seed ^ kLargeStream : cfg.seed, is_large ? k - random : k);
      Sample s;
      s.x = Vector(n);
      for (int a = 0; a < n; ++a) s.x[a] = rng.uniform(box.lo[a], box.hi[a]);
      s.u = rng.uniform(-cfg.u_radius, cfg.u_radius);
      const double xi_mag = is_large ? cfg.large_xi_radius * rng.uniform(0.5, 1.0)
                                     : cfg.xi_radius * std::abs(rng.normal());
      s.xi = xi_mag * rng.direction(n);
      s.eta = cfg.xi_radius * std::abs(rng.normal()) * rng.direction(n);
      s.lambda = rng.direction(n);
      out[structured + k] = std::move(s);
    }
  });
  return out;
}

}  // namespace pq
