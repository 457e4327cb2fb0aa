#pragma once

#include <cstdint>
#include <cstring>
#include <memory>
#include <unordered_map>

#include "wadg/analysis.hpp"

namespace wadg {

// ---------------------------------------------------------------------------
// Smoothed Shepp-Logan phantom.  Ellipses a and b carry no pressure; the band
// inside a and outside b is the elastic "skull", the rest is acoustic tissue.

struct Ellipse {
  double cx, cy;     // center
  double a, b;       // semi-axes along the rotated x/y directions
  double theta_deg;  // rotation
  double value;      // additive pressure
};

inline const std::array<Ellipse, 10>& shepp_logan_ellipses() {
  static const std::array<Ellipse, 10> t = {{
      {0.0, 0.0, 0.69, 0.92, 0.0, 0.0},
      {0.0, -0.0184, 0.6624, 0.874, 0.0, 0.0},
      {0.22, 0.0, 0.11, 0.31, -0.18, 0.02},
      {-0.22, 0.0, 0.16, 0.41, 0.18, 0.02},
      {0.0, 0.35, 0.21, 0.25, 0.0, 0.01},
      {0.0, 0.1, 0.046, 0.046, 0.0, 0.01},
      {0.0, -0.1, 0.046, 0.046, 0.0, 0.01},
      {-0.08, -0.605, 0.046, 0.023, 0.0, 0.01},
      {0.0, -0.605, 0.023, 0.023, 0.0, 0.01},
      {0.06, -0.605, 0.023, 0.046, 0.0, 0.01},
  }};
  return t;
}

/// Normalized elliptical radius (1 on the boundary of the ellipse).
inline double ellipse_radius(const Ellipse& e, double x, double y) {
  double th = e.theta_deg * M_PI / 180.0;
  double dx = x - e.cx, dy = y - e.cy;
  double xr = std::cos(th) * dx + std::sin(th) * dy;
  double yr = -std::sin(th) * dx + std::cos(th) * dy;
  return std::hypot(xr / e.a, yr / e.b);
}

/// C1 even-polynomial transition (1 - t^n)^m across u in [1-w, 1].
inline double smooth_indicator(double u, double w, int m = 2, int n = 4) {
  if (u <= 1.0 - w) return 1.0;
  if (u >= 1.0) return 0.0;
  double t = (u - (1.0 - w)) / w;
  return std::pow(1.0 - std::pow(t, n), m);
}

struct PhantomSpec {
  std::array<Ellipse, 10> ellipses = shepp_logan_ellipses();
  double band = 0.05;  // physical transition width
  int m = 2, n = 4;
};

inline double phantom_pressure(const PhantomSpec& ph, double x, double y) {
  double v = 0;
  for (const auto& e : ph.ellipses) {
    if (e.value == 0.0) continue;
    double w = std::min(1.0, ph.band / std::min(e.a, e.b));
    v += e.value * smooth_indicator(ellipse_radius(e, x, y), w, ph.m, ph.n);
  }
  return v;
}

/// Elastic inside ellipse a and outside ellipse b, acoustic elsewhere.
inline Region skull_region(double x, double y) {
  const auto& t = shepp_logan_ellipses();
  bool skull = ellipse_radius(t[0], x, y) < 1.0 && ellipse_radius(t[1], x, y) >= 1.0;
  return skull ? Region::Elastic : Region::Acoustic;
}

// ---------------------------------------------------------------------------
// Boundary measurements: pressure (acoustic faces) or normal traction
// (elastic faces) at every boundary face quadrature point, every RK step.

struct MeasurementRecord {
  double dt = 0, t_final = 0;
  MatX coords;                  // npts x 2
  std::vector<char> kind;       // 0 = pressure, 1 = normal traction
  std::vector<VecX> samples;    // step count + 1 rows of length npts

  /// Linear interpolation in time, clamped to [0, t_final].
  double sample(Eigen::Index pt, double t) const {
    double s = std::clamp(t, 0.0, t_final) / dt;
    auto i0 = std::min<Eigen::Index>(Eigen::Index(s), Eigen::Index(samples.size()) - 1);
    auto i1 = std::min<Eigen::Index>(i0 + 1, Eigen::Index(samples.size()) - 1);
    double a = s - double(i0);
    return (1.0 - a) * samples[size_t(i0)](pt) + a * samples[size_t(i1)](pt);
  }
};

namespace detail {
inline void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = char((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}
inline std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}
inline void put_f64(std::ostream& os, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(os, v);
}
inline double get_f64(std::istream& is) {
  std::uint64_t v = get_u64(is);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}
}  // namespace detail

/// Layout: "WADGREC1", u64 npts, u64 nsamples, f64 dt, f64 t_final,
/// npts kind bytes, npts (x, y) f64 pairs, nsamples rows of npts f64.
inline void write_record(const std::string& path, const MeasurementRecord& rec) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_record: cannot open " + path);
  os.write("WADGREC1", 8);
  const auto npts = std::uint64_t(rec.coords.rows());
  detail::put_u64(os, npts);
  detail::put_u64(os, rec.samples.size());
  detail::put_f64(os, rec.dt);
  detail::put_f64(os, rec.t_final);
  os.write(rec.kind.data(), std::streamsize(rec.kind.size()));
  for (std::uint64_t i = 0; i < npts; ++i) {
    detail::put_f64(os, rec.coords(Eigen::Index(i), 0));
    detail::put_f64(os, rec.coords(Eigen::Index(i), 1));
  }
  for (const auto& row : rec.samples)
    for (Eigen::Index i = 0; i < row.size(); ++i) detail::put_f64(os, row(i));
}

inline MeasurementRecord read_record(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_record: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (std::string(magic, 8) != "WADGREC1")
    throw std::runtime_error("read_record: bad magic in " + path);
  auto npts = Eigen::Index(detail::get_u64(is));
  auto nsamp = size_t(detail::get_u64(is));
  MeasurementRecord rec;
  rec.dt = detail::get_f64(is);
  rec.t_final = detail::get_f64(is);
  rec.kind.resize(size_t(npts));
  is.read(rec.kind.data(), npts);
  rec.coords.resize(npts, 2);
  for (Eigen::Index i = 0; i < npts; ++i) {
    rec.coords(i, 0) = detail::get_f64(is);
    rec.coords(i, 1) = detail::get_f64(is);
  }
  rec.samples.assign(nsamp, VecX(npts));
  for (auto& row : rec.samples)
    for (Eigen::Index i = 0; i < npts; ++i) row(i) = detail::get_f64(is);
  if (!is) throw std::runtime_error("read_record: truncated file " + path);
  return rec;
}

/// Boundary face quadrature points and trace extraction.
struct BoundaryProbe {
  struct Face {
    int k, f;
    bool acoustic;
  };
  std::vector<Face> faces;
  MatX coords;             // (#faces * Nfq) x 2
  std::vector<char> kind;  // per point

  BoundaryProbe(const ReferenceElement& re, const Mesh& m) {
    const int nfq = re.num_face_quad;
    MatX xf = re.interp_face * m.x, yf = re.interp_face * m.y;
    for (int k = 0; k < m.K; ++k)
      for (int f = 0; f < 3; ++f)
        if (m.faces[size_t(k)][size_t(f)].neighbor < 0) faces.push_back({k, f, m.is_acoustic(k)});
    coords.resize(Eigen::Index(faces.size()) * nfq, 2);
    kind.resize(size_t(coords.rows()));
    for (size_t i = 0; i < faces.size(); ++i)
      for (int q = 0; q < nfq; ++q) {
        Eigen::Index r = Eigen::Index(i) * nfq + q;
        coords(r, 0) = xf(faces[i].f * nfq + q, faces[i].k);
        coords(r, 1) = yf(faces[i].f * nfq + q, faces[i].k);
        kind[size_t(r)] = faces[i].acoustic ? 0 : 1;
      }
  }

  /// Pressure on acoustic faces, normal traction n.(A_n^T sigma) on elastic.
  VecX extract(const ReferenceElement& re, const Mesh& m, const State& s) const {
    const int nfq = re.num_face_quad;
    VecX out(coords.rows());
    for (size_t i = 0; i < faces.size(); ++i) {
      const int k = faces[i].k, f = faces[i].f, c = m.local[size_t(k)];
      auto V = re.interp_face.middleRows(f * nfq, nfq);
      if (faces[i].acoustic) {
        out.segment(Eigen::Index(i) * nfq, nfq) = V * s.p.col(c);
      } else {
        VecX s1 = V * s.s1.col(c), s2 = V * s.s2.col(c), s3 = V * s.s3.col(c);
        for (int q = 0; q < nfq; ++q) {
          double n1 = m.nx(f * nfq + q, k), n2 = m.ny(f * nfq + q, k);
          out(Eigen::Index(i) * nfq + q) =
              n1 * (n1 * s1(q) + n2 * s3(q)) + n2 * (n2 * s2(q) + n1 * s3(q));
        }
      }
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Forward measurement, time reversal, and the Neumann-series reconstruction.

struct PatConfig {
  int N = 3, n = 32;          // order and elements per side
  double t_final = 2.0;
  double tau = 1.0;           // all penalties
  double cfl = 0.25;
  double c_tissue = 1.0;
  double cp_skull = 2.0, cs_skull = 1.0, rho_skull = 2.0;
  bool acoustic_only = false;  // skull replaced by acoustic media at c = cp
  std::string mesh_file;       // optional; regions re-derived from the phantom
  PhantomSpec phantom;
};

class PatPipeline {
 public:
  PatPipeline(const ReferenceElement& re, PatConfig cfg) : re_(re), cfg_(cfg) {
    std::function<Region(double, double)> region;
    if (cfg_.acoustic_only)
      region = [](double, double) { return Region::Acoustic; };
    else
      region = skull_region;
    if (cfg_.mesh_file.empty()) {
      mesh_fwd_ = uniform_square_mesh(cfg_.n, re_, region);
    } else {
      mesh_fwd_ = load_mesh(cfg_.mesh_file, re_);
      for (int k = 0; k < mesh_fwd_.K; ++k) {
        Vec2 cen = (mesh_fwd_.vertices.row(mesh_fwd_.elements[size_t(k)][0]) +
                    mesh_fwd_.vertices.row(mesh_fwd_.elements[size_t(k)][1]) +
                    mesh_fwd_.vertices.row(mesh_fwd_.elements[size_t(k)][2])) /
                   3.0;
        mesh_fwd_.region[size_t(k)] = region(cen(0), cen(1));
      }
      finalize_mesh(mesh_fwd_, re_);
    }
    set_all_boundary_bc(mesh_fwd_, Bc::Absorbing);
    mesh_bwd_ = mesh_fwd_;
    set_region_boundary_bc(mesh_bwd_, Bc::DirichletPressure, Bc::TractionPrescribed);

    double c2t = cfg_.c_tissue * cfg_.c_tissue, cp2 = cfg_.cp_skull * cfg_.cp_skull;
    double mu = cfg_.rho_skull * cfg_.cs_skull * cfg_.cs_skull;
    double lam = cfg_.rho_skull * cp2 - 2.0 * mu;
    Mat3 C = isotropic_stiffness(lam, mu);
    auto c2 = [this, c2t, cp2](double x, double y) {
      return (cfg_.acoustic_only && skull_region(x, y) == Region::Elastic) ? cp2 : c2t;
    };
    double rho = cfg_.rho_skull;
    mat_ = make_material(
        mesh_fwd_, re_, c2, [C](double, double) { return C; }, [rho](int) { return rho; });

    FluxParams tau{cfg_.tau, cfg_.tau};
    op_fwd_ = std::make_unique<CoupledDgOperator>(re_, mesh_fwd_, mat_, tau, GeometryMode::Affine);
    op_bwd_ = std::make_unique<CoupledDgOperator>(re_, mesh_bwd_, mat_, tau, GeometryMode::Affine);
    probe_ = std::make_unique<BoundaryProbe>(re_, mesh_fwd_);

    double dt = estimate_dt(mesh_fwd_, mat_, cfg_.N, cfg_.cfl);
    nsteps_ = std::max(1L, long(std::ceil(cfg_.t_final / dt - 1e-12)));
    dt_ = cfg_.t_final / double(nsteps_);

    // point index lookup for driving the backward BC from a record
    for (Eigen::Index i = 0; i < probe_->coords.rows(); ++i)
      lookup_[point_key(probe_->coords(i, 0), probe_->coords(i, 1))] = int(i);
  }

  PatPipeline(const PatPipeline&) = delete;
  PatPipeline& operator=(const PatPipeline&) = delete;

  const Mesh& mesh() const { return mesh_fwd_; }
  const MaterialField& material() const { return mat_; }
  double dt() const { return dt_; }

  /// Pressure field projected onto the acoustic elements; all else zero.
  State initial_state(const std::function<double(double, double)>& p0) const {
    State s = make_state(re_, mesh_fwd_);
    MatX xq = re_.interp_vol * mesh_fwd_.x, yq = re_.interp_vol * mesh_fwd_.y;
    for (int a = 0; a < int(mesh_fwd_.acoustic_elems.size()); ++a) {
      int k = mesh_fwd_.acoustic_elems[size_t(a)];
      VecX pq(re_.num_quad);
      for (int q = 0; q < re_.num_quad; ++q) pq(q) = p0(xq(q, k), yq(q, k));
      MatX MJ = re_.interp_vol.transpose() *
                (re_.quad_w.array() * mesh_fwd_.J.col(k).array()).matrix().asDiagonal() *
                re_.interp_vol;
      VecX rhs = re_.interp_vol.transpose() *
                 (re_.quad_w.array() * mesh_fwd_.J.col(k).array() * pq.array()).matrix();
      s.p.col(a) = MJ.ldlt().solve(rhs);
    }
    return s;
  }

  struct ForwardResult {
    MeasurementRecord record;
    State final_state;
  };

  /// Forward run with absorbing boundaries, recording boundary traces.
  ForwardResult forward_measure(const State& s0) const {
    ForwardResult fr;
    fr.record.dt = dt_;
    fr.record.t_final = cfg_.t_final;
    fr.record.coords = probe_->coords;
    fr.record.kind = probe_->kind;
    fr.record.samples.reserve(size_t(nsteps_) + 1);
    fr.final_state =
        integrate(s0, make_rhs(*op_fwd_), dt_, cfg_.t_final, [&](const State& st, double) {
          fr.record.samples.push_back(probe_->extract(re_, mesh_fwd_, st));
        });
    return fr;
  }

  /// Forward run without measurement bookkeeping.
  State forward_final(const State& s0) const {
    return integrate(s0, make_rhs(*op_fwd_), dt_, cfg_.t_final);
  }

  /// Backward-in-time solve on the reversed clock: start from the (velocity
  /// flipped) final state, drive Dirichlet data with the time-reversed record
  /// (or zero), and return the state at physical t = 0.
  State time_reverse(const MeasurementRecord* rec, const State* final_state) {
    State s0 = final_state ? *final_state : make_state(re_, mesh_bwd_);
    s0.u1 = -s0.u1;
    s0.u2 = -s0.u2;
    s0.v1 = -s0.v1;
    s0.v2 = -s0.v2;
    if (rec) {
      if (std::abs(rec->t_final - cfg_.t_final) > 1e-12 * std::max(1.0, cfg_.t_final))
        throw std::runtime_error("time_reverse: record final time does not match the pipeline");
      const double T = cfg_.t_final;
      op_bwd_->pressure_bc = [this, rec, T](double x, double y, double t) {
        return rec->sample(point_index(x, y), T - t);
      };
      op_bwd_->traction_bc = [this, rec, T](double x, double y, double n1, double n2, double t) {
        double v = rec->sample(point_index(x, y), T - t);
        return Vec2(v * n1, v * n2);
      };
    } else {
      op_bwd_->pressure_bc = [](double, double, double) { return 0.0; };
      op_bwd_->traction_bc = [](double, double, double, double, double) {
        return Vec2::Zero().eval();
      };
    }
    return integrate(std::move(s0), make_rhs(*op_bwd_), dt_, cfg_.t_final);
  }

  /// Relative L2 error of the reconstructed pressure against a reference
  /// field, over the acoustic elements.
  double relative_error(const State& s, const std::function<double(double, double)>& ref) const {
    MatX xq = re_.interp_vol * mesh_fwd_.x, yq = re_.interp_vol * mesh_fwd_.y;
    double err2 = 0, norm2 = 0;
    for (int k = 0; k < mesh_fwd_.K; ++k) {
      bool ac = mesh_fwd_.is_acoustic(k);
      VecX pq;
      if (ac) pq = re_.interp_vol * s.p.col(mesh_fwd_.local[size_t(k)]);
      for (int q = 0; q < re_.num_quad; ++q) {
        double g = ref(xq(q, k), yq(q, k));
        double wj = re_.quad_w(q) * mesh_fwd_.J(q, k);
        norm2 += wj * g * g;
        if (ac) err2 += wj * (pq(q) - g) * (pq(q) - g);
      }
    }
    return std::sqrt(err2 / norm2);
  }

  struct ReconstructionResult {
    State P;                     // last iterate
    std::vector<double> errors;  // per-iteration relative errors (if truth given)
    double kappa_est = 0;        // ||P_b|| / ||P_0|| of the last correction
    bool diverged = false;       // errors grew across two consecutive iterations
  };

  /// Truncated Neumann series (fixed point P_n = P_0 + (Id - RF) P_{n-1}).
  ReconstructionResult neumann_reconstruct(
      const MeasurementRecord& rec, int max_iter,
      const std::function<double(double, double)>& truth = {}) {
    if (max_iter < 1) throw std::invalid_argument("neumann_reconstruct: max_iter must be >= 1");
    ReconstructionResult out;
    State P0 = time_reverse(&rec, nullptr);
    out.P = P0;
    if (truth) out.errors.push_back(relative_error(out.P, truth));
    double norm0 = std::max(out.P.p.norm(), 1e-300);
    int grew = 0;
    for (int it = 2; it <= max_iter; ++it) {
      State s0 = make_state(re_, mesh_fwd_);
      s0.p = out.P.p;
      State sf = forward_final(s0);
      State Pb = time_reverse(nullptr, &sf);
      out.kappa_est = Pb.p.norm() / norm0;
      out.P = std::move(Pb);
      out.P.p += P0.p;
      if (truth) {
        out.errors.push_back(relative_error(out.P, truth));
        size_t n = out.errors.size();
        grew = (out.errors[n - 1] > out.errors[n - 2]) ? grew + 1 : 0;
        if (grew >= 2) out.diverged = true;
      }
    }
    return out;
  }

 private:
  static std::uint64_t point_key(double x, double y) {
    auto qx = std::uint64_t(std::int64_t(std::llround(x * 1e9)));
    auto qy = std::uint64_t(std::int64_t(std::llround(y * 1e9)));
    return qx * 0x9e3779b97f4a7c15ull ^ qy;
  }

  int point_index(double x, double y) const {
    auto it = lookup_.find(point_key(x, y));
    if (it == lookup_.end())
      throw std::runtime_error("time_reverse: boundary point not present in the record");
    return it->second;
  }

  const ReferenceElement& re_;
  PatConfig cfg_;
  Mesh mesh_fwd_, mesh_bwd_;
  MaterialField mat_;
  std::unique_ptr<CoupledDgOperator> op_fwd_, op_bwd_;
  std::unique_ptr<BoundaryProbe> probe_;
  std::unordered_map<std::uint64_t, int> lookup_;
  long nsteps_ = 0;
  double dt_ = 0;
};

inline void write_pat_errors_csv(const std::string& path,
                                 const std::vector<double>& coupled,
                                 const std::vector<double>& acoustic = {}) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_pat_errors_csv: cannot open " + path);
  os.precision(12);
  os << (acoustic.empty() ? "iteration,error\n" : "iteration,coupled,acoustic\n");
  for (size_t i = 0; i < coupled.size(); ++i) {
    os << i + 1 << "," << coupled[i];
    if (!acoustic.empty()) os << "," << acoustic[std::min(i, acoustic.size() - 1)];
    os << "\n";
  }
}

}  // namespace wadg
