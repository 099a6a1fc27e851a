#include "mixedpo/sampling.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "mixedpo/errors.h"

namespace mixedpo {

namespace {

using Clock = std::chrono::steady_clock;

Eigen::Index Tri(Eigen::Index n) { return n * (n + 1) / 2; }

// a (x) b for vectors: entry i * |b| + j is a_i b_j.
void AddKron(Eigen::Ref<Vector> acc, const Vector& a, const Vector& b, double scale) {
  const Eigen::Index nb = b.size();
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double ai = scale * a(i);
    for (Eigen::Index j = 0; j < nb; ++j) acc(i * nb + j) += ai * b(j);
  }
}

Vector Draw(std::mt19937_64& rng, Eigen::Index size, double norm) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector out(size);
  if (size == 0) return out;
  if (norm == 0.0) return Vector::Zero(size);
  do {
    for (Eigen::Index i = 0; i < size; ++i) out(i) = normal(rng);
  } while (out.norm() == 0.0);
  return out * (norm / out.norm());
}

std::string Format(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::vector<double> ParseRow(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    char* end = nullptr;
    const double x = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0') {
      throw Error(ErrorCode::kIo, "trajectory CSV: bad number '" + cell + "'");
    }
    out.push_back(x);
  }
  return out;
}

double MsSince(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

void SimulationConfig::Validate() const {
  if (!(dt > 0.0) || !(interval > 0.0) || !(horizon > 0.0)) {
    throw Error(ErrorCode::kBadParams, "dt, interval and horizon must be > 0");
  }
  if (dt > interval) throw Error(ErrorCode::kBadParams, "dt must not exceed the interval");
  const double steps = interval / dt;
  if (std::abs(steps - std::round(steps)) > 1e-6 * steps) {
    throw Error(ErrorCode::kBadParams, "interval must be a multiple of dt");
  }
  const double count = horizon / interval;
  if (std::abs(count - std::round(count)) > 1e-6 * count) {
    throw Error(ErrorCode::kBadParams, "horizon must be a multiple of the interval");
  }
  if (!(blowup > 0.0)) throw Error(ErrorCode::kBadParams, "blow-up bound must be > 0");
}

TrajectoryLog Simulate(const StochasticPlant& plant, const GainPair& gains0,
                       const SimulationConfig& config) {
  config.Validate();
  CheckGainShapes(plant, gains0);
  const Eigen::Index n = plant.n(), m = plant.m(), v = plant.v();
  const int per_interval = static_cast<int>(std::lround(config.interval / config.dt));
  const auto count = static_cast<Eigen::Index>(std::llround(config.horizon / config.interval));
  const double dt = config.dt;
  const double sigma = plant.noise_intensity();
  const double sqdt = std::sqrt(dt);
  const double k_norm = gains0.K.norm();
  const double r_u = config.r_u >= 0.0 ? config.r_u : (k_norm > 0.0 ? 0.1 * k_norm : 0.1);
  const double r_w = config.r_w >= 0.0 ? config.r_w : (k_norm > 0.0 ? 0.1 * k_norm : 0.1);

  TrajectoryLog log;
  log.n = n;
  log.m = m;
  log.v = v;
  log.dt = dt;
  log.interval = config.interval;
  log.seed = config.seed;
  log.noise_intensity = sigma;
  log.states.resize(count + 1, n);
  log.explore_u.resize(count, m);
  log.explore_w.resize(count, v);
  log.increments.resize(count, v);
  DataMatrices& d = log.data;
  d.interval = config.interval;
  d.dxx.resize(count, Tri(n));
  d.dww.resize(count, Tri(v));
  d.ixx.resize(count, n * n);
  d.iww.resize(count, v * v);
  d.ixw.resize(count, n * v);
  d.iux.resize(count, n * m);

  // Separate streams so the exploration path does not depend on sigma.
  std::mt19937_64 explore_rng(config.seed);
  std::mt19937_64 noise_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);

  const Matrix& a = plant.A();
  const Matrix& b = plant.B();
  const Matrix& dmat = plant.D();
  Vector x = config.x0.size() == 0 ? Vector::Ones(n) : config.x0;
  if (x.size() != n) throw Error(ErrorCode::kDimensionMismatch, "x0 must have length n");

  Vector ixx(n * n), iww(v * v), ixw(n * v), iux(n * m);
  Vector db(v), incr(v), x_next(n), u(m), w(v), u_next(m), w_next(v);
  for (Eigen::Index i = 0; i < count; ++i) {
    const Vector eta_u = Draw(explore_rng, m, r_u);
    const Vector eta_w = Draw(explore_rng, v, r_w);
    log.instants.push_back(static_cast<double>(i) * config.interval);
    log.states.row(i) = x.transpose();
    log.explore_u.row(i) = eta_u.transpose();
    log.explore_w.row(i) = eta_w.transpose();
    ixx.setZero();
    iww.setZero();
    ixw.setZero();
    iux.setZero();
    incr.setZero();
    const Vector x_start = x;
    u = -gains0.K * x + eta_u;
    w = gains0.L * x + eta_w;
    const Vector w_start = w;
    for (int s = 0; s < per_interval; ++s) {
      for (Eigen::Index j = 0; j < v; ++j) db(j) = sqdt * normal(noise_rng);
      incr += db;
      x_next = x + (a * x + b * u + dmat * w) * dt;
      if (sigma != 0.0) x_next += sigma * (dmat * db);
      u_next = -gains0.K * x_next + eta_u;
      w_next = gains0.L * x_next + eta_w;
      AddKron(ixx, x, x, 0.5 * dt);
      AddKron(ixx, x_next, x_next, 0.5 * dt);
      AddKron(iux, u, x, 0.5 * dt);
      AddKron(iux, u_next, x_next, 0.5 * dt);
      AddKron(iww, w, w, 0.5 * dt);
      AddKron(iww, w_next, w_next, 0.5 * dt);
      AddKron(ixw, w, x, 0.5 * dt);
      AddKron(ixw, w_next, x_next, 0.5 * dt);
      if (sigma != 0.0) AddKron(ixw, db, x, sigma);  // left point
      x.swap(x_next);
      u.swap(u_next);
      w.swap(w_next);
      if (!x.allFinite() || x.norm() > config.blowup) {
        throw Error(ErrorCode::kBlowup,
                    "state norm exceeded " + Format(config.blowup) + " at t = " +
                        Format(static_cast<double>(i) * config.interval +
                               (s + 1) * dt));
      }
    }
    d.dxx.row(i) = (Vecv(x) - Vecv(x_start)).transpose();
    d.dww.row(i) = (Vecv(w) - Vecv(w_start)).transpose();
    d.ixx.row(i) = ixx.transpose();
    d.iww.row(i) = iww.transpose();
    d.ixw.row(i) = ixw.transpose();
    d.iux.row(i) = iux.transpose();
    log.increments.row(i) = incr.transpose();
  }
  log.instants.push_back(static_cast<double>(count) * config.interval);
  log.states.row(count) = x.transpose();
  return log;
}

void SaveTrajectoryCsv(const TrajectoryLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << "# trajectory n=" << log.n << " m=" << log.m << " v=" << log.v
      << " dt=" << Format(log.dt) << " interval=" << Format(log.interval)
      << " seed=" << log.seed << " noise=" << Format(log.noise_intensity)
      << " intervals=" << log.intervals() << "\n";
  out << "s,x,eta_u,eta_w,increment,dxx,dww,ixx,iww,ixw,iux\n";
  const DataMatrices& d = log.data;
  for (Eigen::Index i = 0; i <= log.intervals(); ++i) {
    std::string line = Format(log.instants[static_cast<std::size_t>(i)]);
    auto put = [&](const Matrix& mat) {
      for (Eigen::Index j = 0; j < mat.cols(); ++j) line += "," + Format(mat(i, j));
    };
    put(log.states);
    if (i < log.intervals()) {
      for (const Matrix* mat : {&log.explore_u, &log.explore_w, &log.increments, &d.dxx,
                                &d.dww, &d.ixx, &d.iww, &d.ixw, &d.iux}) {
        put(*mat);
      }
    }
    out << line << "\n";
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

TrajectoryLog LoadTrajectoryCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::string header;
  std::getline(in, header);
  TrajectoryLog log;
  long long n = -1, m = -1, v = -1, count = -1;
  unsigned long long seed = 0;
  double dt = 0, interval = 0, noise = 0;
  char dt_buf[64], iv_buf[64], noise_buf[64];
  if (std::sscanf(header.c_str(),
                  "# trajectory n=%lld m=%lld v=%lld dt=%63s interval=%63s seed=%llu "
                  "noise=%63s intervals=%lld",
                  &n, &m, &v, dt_buf, iv_buf, &seed, noise_buf, &count) != 8 ||
      n <= 0 || m <= 0 || v <= 0 || count < 0) {
    throw Error(ErrorCode::kIo, "trajectory CSV: bad header in " + path);
  }
  dt = std::strtod(dt_buf, nullptr);
  interval = std::strtod(iv_buf, nullptr);
  noise = std::strtod(noise_buf, nullptr);
  std::string line;
  std::getline(in, line);  // column names
  log.n = n;
  log.m = m;
  log.v = v;
  log.dt = dt;
  log.interval = interval;
  log.seed = seed;
  log.noise_intensity = noise;
  log.states.resize(count + 1, n);
  log.explore_u.resize(count, m);
  log.explore_w.resize(count, v);
  log.increments.resize(count, v);
  DataMatrices& d = log.data;
  d.interval = interval;
  d.dxx.resize(count, Tri(n));
  d.dww.resize(count, Tri(v));
  d.ixx.resize(count, n * n);
  d.iww.resize(count, v * v);
  d.ixw.resize(count, n * v);
  d.iux.resize(count, n * m);
  for (long long i = 0; i <= count; ++i) {
    if (!std::getline(in, line)) throw Error(ErrorCode::kIo, "trajectory CSV truncated");
    const std::vector<double> row = ParseRow(line);
    std::size_t pos = 0;
    auto take = [&](Matrix& mat) {
      if (pos + static_cast<std::size_t>(mat.cols()) > row.size()) {
        throw Error(ErrorCode::kIo, "trajectory CSV: short row");
      }
      for (Eigen::Index j = 0; j < mat.cols(); ++j) mat(i, j) = row[pos++];
    };
    if (row.empty()) throw Error(ErrorCode::kIo, "trajectory CSV: empty row");
    log.instants.push_back(row[pos++]);
    take(log.states);
    if (i < count) {
      for (Matrix* mat : {&log.explore_u, &log.explore_w, &log.increments, &d.dxx,
                          &d.dww, &d.ixx, &d.iww, &d.ixw, &d.iux}) {
        take(*mat);
      }
    }
    if (pos != row.size()) throw Error(ErrorCode::kIo, "trajectory CSV: long row");
  }
  return log;
}

KnownWeights KnownWeightsOf(const StochasticPlant& plant) {
  return {plant.D(), plant.Q(), plant.R()};
}

LSSystem Assemble(const DataMatrices& data, const Matrix& k, const Matrix& l,
                  const KnownWeights& known, double gamma) {
  const Eigen::Index n = known.D.rows(), v = known.D.cols(), m = known.R.rows();
  if (k.rows() != m || k.cols() != n || l.rows() != v || l.cols() != n ||
      known.Q.rows() != n || known.Q.cols() != n || known.R.cols() != m ||
      data.dxx.cols() != Tri(n) || data.ixx.cols() != n * n ||
      data.ixw.cols() != n * v || data.iux.cols() != n * m) {
    throw Error(ErrorCode::kDimensionMismatch, "assemble: data and gain shapes differ");
  }
  const Eigen::Index rows = data.rows();
  const Eigen::Index np = Tri(n);
  const double g2 = gamma * gamma;
  LSSystem sys;
  sys.n = n;
  sys.m = m;
  sys.v = v;
  sys.theta.resize(rows, np + m * n + n * v + 1);

  // x^T P x = svec(P) . [x_i^2, sqrt2 x_i x_j].
  Matrix dxx = data.dxx;
  Eigen::Index c = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    ++c;
    for (Eigen::Index j = i + 1; j < n; ++j) dxx.col(c++) *= M_SQRT2;
  }
  const Matrix eye_n = Matrix::Identity(n, n);
  sys.theta.leftCols(np) = dxx;
  sys.theta.middleCols(np, m * n) =
      -2.0 * (data.ixx * Kron(k.transpose(), eye_n) + data.iux);
  sys.theta.middleCols(np + m * n, n * v) =
      -2.0 * g2 * (data.ixw - data.ixx * Kron(l.transpose(), eye_n));
  sys.theta.col(np + m * n + n * v).setConstant(-data.interval);

  const Matrix q_k = known.Q + k.transpose() * known.R * k;
  sys.upsilon = -data.ixx * Vec(q_k) + g2 * data.ixx * Vec(l.transpose() * l);
  return sys;
}

RankReport RankCheck(const LSSystem& sys) {
  RankReport rep;
  const Eigen::Index n = sys.n, m = sys.m, v = sys.v;
  rep.rows = sys.theta.rows();
  rep.columns = sys.theta.cols();
  rep.required_blocks = Tri(n) + m * n + n * v + v * v;
  rep.required_printed = n * (n + 1) + m * n + n * v + v * v;
  rep.enough_rows = rep.rows >= rep.columns;
  if (rep.rows == 0 || rep.columns == 0) return rep;

  Eigen::BDCSVD<Matrix> raw(sys.theta);
  const Vector& rs = raw.singularValues();
  rep.raw_condition = rs(rs.size() - 1) > 0.0 ? rs(0) / rs(rs.size() - 1)
                                              : std::numeric_limits<double>::infinity();
  Matrix scaled = sys.theta;
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    const double cn = scaled.col(j).norm();
    if (cn > 0.0) scaled.col(j) /= cn;
  }
  Eigen::BDCSVD<Matrix> svd(scaled);
  const Vector& s = svd.singularValues();
  rep.max_singular = s(0);
  rep.min_singular = rep.rows >= rep.columns ? s(s.size() - 1) : 0.0;
  rep.condition = rep.min_singular > 0.0 ? rep.max_singular / rep.min_singular
                                         : std::numeric_limits<double>::infinity();
  rep.full_rank = rep.enough_rows && rep.max_singular > 0.0 &&
                  rep.min_singular > 1e-8 * rep.max_singular;
  return rep;
}

LsEstimate LsUpdate(const LSSystem& sys, const KnownWeights& known) {
  const RankReport rank = RankCheck(sys);
  if (!rank.full_rank) {
    throw Error(ErrorCode::kRankDeficient,
                "data matrix is rank deficient: " + std::to_string(rank.rows) +
                    " rows for " + std::to_string(rank.columns) +
                    " unknowns, equilibrated condition " + Format(rank.condition));
  }
  const Eigen::Index n = sys.n, m = sys.m, v = sys.v;
  const Eigen::Index np = Tri(n);
  Vector scale(sys.theta.cols());
  Matrix scaled = sys.theta;
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    scale(j) = scaled.col(j).norm();
    scaled.col(j) /= scale(j);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(scaled);
  const Vector z = qr.solve(sys.upsilon).cwiseQuotient(scale);

  LsEstimate est;
  est.P = Symmetrize(Smat(z.head(np)));
  const Matrix kr = Unvec(z.segment(np, m * n), n, m);  // K'^T R
  est.K_next = known.R.llt().solve(kr.transpose());
  est.L_next = Unvec(z.segment(np + m * n, n * v), n, v).transpose();
  est.trace_coefficient = z(z.size() - 1);
  est.condition = rank.condition;
  est.ill_conditioned = rank.condition > 1e10;
  est.residual = (sys.theta * z - sys.upsilon).norm();
  return est;
}

IterationTrace RunModelFree(const KnownWeights& known, const TrajectoryLog& log,
                            const DesignConfig& config, const GainPair& init,
                            const ModelFreeOptions& options) {
  config.Validate();
  const Eigen::Index n = known.D.rows(), v = known.D.cols(), m = known.R.rows();
  if (log.n != n || log.m != m || log.v != v) {
    throw Error(ErrorCode::kDimensionMismatch, "log dimensions differ from the weights");
  }
  if (init.K.rows() != m || init.K.cols() != n || init.L.rows() != v ||
      init.L.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "initial gain shapes");
  }
  const RankReport rank = RankCheck(
      Assemble(log.data, init.K, Matrix::Zero(v, n), known, config.gamma));
  if (!rank.full_rank) {
    throw Error(ErrorCode::kRankDeficient,
                "rank check failed before the first update: " +
                    std::to_string(rank.rows) + " intervals, " +
                    std::to_string(rank.columns) + " required");
  }

  IterationTrace trace;
  trace.method = "model-free";
  Matrix k = init.K;
  for (int p = 0; p < config.outer_max; ++p) {
    const auto t0 = Clock::now();
    OuterRecord rec;
    rec.p = p;
    rec.K = k;
    Matrix l = Matrix::Zero(v, n);
    LsEstimate est;
    for (int q = 0; q <= config.inner_max; ++q) {
      const auto tq = Clock::now();
      est = LsUpdate(Assemble(log.data, k, l, known, config.gamma), known);
      InnerRecord in;
      in.q = q;
      in.L = l;
      in.P = est.P;
      if (q > 0) in.step = (est.P - rec.inner.back().P).norm();
      in.wall_ms = MsSince(tq);
      rec.inner.push_back(in);
      if (q > 0 && in.step <= config.tol) {
        rec.inner_converged = true;
        break;
      }
      l = est.L_next;
    }
    rec.P = est.P;
    rec.K_next = est.K_next;
    rec.gain_step = (est.K_next - k).norm();
    rec.wall_ms = MsSince(t0);
    trace.total_ms += rec.wall_ms;
    trace.outer.push_back(rec);
    trace.K_final = est.K_next;
    trace.P_final = est.P;
    if (!est.K_next.allFinite() || est.K_next.norm() > options.divergence_bound) {
      throw Error(ErrorCode::kDivergenceDetected,
                  "gain norm left the bound at p = " + std::to_string(p));
    }
    if (rec.gain_step <= config.tol) {
      trace.converged = true;
      break;
    }
    k = est.K_next;
  }
  return trace;
}

}  // namespace mixedpo
