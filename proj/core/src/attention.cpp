#include "syncdraw/attention.hpp"

#include <algorithm>
#include <cmath>

#include "syncdraw/errors.hpp"

namespace syncdraw {

namespace {

bool all_finite(const AttentionParams& p) {
  return std::isfinite(p.gp_raw) && std::isfinite(p.gq_raw) &&
         std::isfinite(p.log_sigma) && std::isfinite(p.log_delta_raw) &&
         std::isfinite(p.log_beta);
}

// Offset of grid point u (1-based) from the grid center, in stride units.
double grid_offset(int u, int divisor_points) {
  return (u + 1.0) - 0.5 * divisor_points - 0.5;  // u is 0-based here
}

int divisor_points(const FrameGeometry& geom, const GridPolicy& policy) {
  return policy.frame_count_divisor ? geom.N : geom.K;
}

void check_pair(const Filterbank& fp, const Filterbank& fq) {
  if (fp.grid_size() != fq.grid_size())
    throw ShapeError("attention: filterbank grid sizes differ");
}

}  // namespace

void FrameGeometry::validate() const {
  if (A < 1 || B < 1 || N < 1)
    throw ParamError("FrameGeometry: A, B, N must be >= 1");
  if (K < 1 || K > std::min(A, B))
    throw ParamError("FrameGeometry: K must satisfy 1 <= K <= min(A,B)");
}

GridSpec map_params(const AttentionParams& raw, const FrameGeometry& geom,
                    const GridPolicy& policy) {
  geom.validate();
  if (!all_finite(raw))
    throw ParamError("map_params: non-finite attention parameter");
  const int points = divisor_points(geom, policy);
  GridSpec spec;
  spec.gp = 0.5 * (geom.A + 1.0) * (raw.gp_raw + 1.0);
  spec.gq = 0.5 * (geom.B + 1.0) * (raw.gq_raw + 1.0);
  spec.delta = points > 1 ? (std::max(geom.A, geom.B) - 1.0) / (points - 1.0) *
                                std::exp(raw.log_delta_raw)
                          : 0.0;
  spec.sigma = std::exp(raw.log_sigma);
  spec.beta = std::exp(raw.log_beta);
  return spec;
}

std::pair<Vector, Vector> grid_centers(const GridSpec& spec,
                                       const FrameGeometry& geom,
                                       const GridPolicy& policy) {
  const int K = geom.K;
  const int points = divisor_points(geom, policy);
  Vector mu_p(K), mu_q(K);
  for (int u = 0; u < K; ++u) {
    const double off = grid_offset(u, points);
    mu_p[u] = spec.gp + off * spec.delta;
    mu_q[u] = spec.gq + off * spec.delta;
  }
  return {mu_p, mu_q};
}

Filterbank build_filterbank(const Vector& centers, double sigma, int D) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw ParamError("build_filterbank: sigma must be positive");
  if (D < 1) throw ParamError("build_filterbank: axis length must be >= 1");
  const int K = static_cast<int>(centers.size());
  Filterbank fb;
  fb.matrix.resize(K, D);
  fb.centers = centers;
  fb.row_sum.resize(K);
  fb.uniform_row.assign(K, 0);
  fb.sigma = sigma;
  const double inv_2s2 = 1.0 / (2.0 * sigma * sigma);
  for (int u = 0; u < K; ++u) {
    double z = 0.0;
    for (int a = 0; a < D; ++a) {
      const double d = (a + 1.0) - centers[u];
      const double e = std::exp(-d * d * inv_2s2);
      fb.matrix(u, a) = e;
      z += e;
    }
    fb.row_sum[u] = z;
    if (z < kRowSumGuard) {
      fb.matrix.row(u).setConstant(1.0 / D);
      fb.uniform_row[u] = 1;
    } else {
      fb.matrix.row(u) /= z;
    }
  }
  return fb;
}

Filterbank build_temporal_filterbank(double center, double sigma, double delta,
                                     int grid_size, int frame_count) {
  if (grid_size < 1 || grid_size > frame_count)
    throw ParamError("build_temporal_filterbank: need 1 <= K_t <= N");
  Vector centers(grid_size);
  for (int u = 0; u < grid_size; ++u)
    centers[u] = center + grid_offset(u, grid_size) * delta;
  return build_filterbank(centers, sigma, frame_count);
}

Matrix read_patch(const Filterbank& fp, const Filterbank& fq, double beta,
                  const Matrix& frame) {
  check_pair(fp, fq);
  if (fp.axis_len() != frame.rows() || fq.axis_len() != frame.cols())
    throw ShapeError("read_patch: filterbank/frame dimension mismatch");
  return beta * (fp.matrix * frame * fq.matrix.transpose());
}

Matrix write_patch(const Filterbank& fp_hat, const Filterbank& fq_hat,
                   double beta_hat, const Matrix& window) {
  check_pair(fp_hat, fq_hat);
  const int K = fp_hat.grid_size();
  if (window.rows() != K || window.cols() != K)
    throw ShapeError("write_patch: window must be K x K");
  return (1.0 / beta_hat) *
         (fp_hat.matrix.transpose() * window * fq_hat.matrix);
}

std::vector<Matrix> read_cuboid(const Filterbank& fp, const Filterbank& fq,
                                const Filterbank& fz, double beta,
                                const std::vector<Matrix>& video) {
  check_pair(fp, fq);
  const int N = fz.axis_len();
  if (static_cast<int>(video.size()) != N)
    throw ShapeError("read_cuboid: temporal filterbank/frame count mismatch");
  const int Kt = fz.grid_size();
  std::vector<Matrix> out(Kt);
  for (int t = 0; t < Kt; ++t) {
    Matrix mixed = Matrix::Zero(video[0].rows(), video[0].cols());
    for (int i = 0; i < N; ++i) mixed.noalias() += fz.matrix(t, i) * video[i];
    out[t] = read_patch(fp, fq, beta, mixed);
  }
  return out;
}

std::vector<Matrix> write_cuboid(const Filterbank& fp, const Filterbank& fq,
                                 const Filterbank& fz, double beta_hat,
                                 const std::vector<Matrix>& windows) {
  check_pair(fp, fq);
  const int N = fz.axis_len();
  const int Kt = fz.grid_size();
  if (static_cast<int>(windows.size()) != Kt)
    throw ShapeError("write_cuboid: need one window per temporal grid point");
  std::vector<Matrix> out(N, Matrix::Zero(fp.axis_len(), fq.axis_len()));
  for (int t = 0; t < Kt; ++t) {
    const Matrix spread = write_patch(fp, fq, beta_hat, windows[t]);
    for (int i = 0; i < N; ++i) out[i].noalias() += fz.matrix(t, i) * spread;
  }
  return out;
}

FrameAttention make_frame_attention(const AttentionParams& raw,
                                    const FrameGeometry& geom,
                                    const GridPolicy& policy) {
  FrameAttention fa;
  fa.raw = raw;
  fa.spec = map_params(raw, geom, policy);
  auto [mu_p, mu_q] = grid_centers(fa.spec, geom, policy);
  fa.fp = build_filterbank(mu_p, fa.spec.sigma, geom.A);
  fa.fq = build_filterbank(mu_q, fa.spec.sigma, geom.B);
  return fa;
}

FilterbankGrad filterbank_backward(const Filterbank& fb,
                                   const Matrix& upstream) {
  const int K = fb.grid_size();
  const int D = fb.axis_len();
  if (upstream.rows() != K || upstream.cols() != D)
    throw ShapeError("filterbank_backward: upstream shape mismatch");
  FilterbankGrad g;
  g.d_centers = Vector::Zero(K);
  const double s = fb.sigma;
  const double inv_s2 = 1.0 / (s * s);
  const double inv_s3 = inv_s2 / s;
  for (int u = 0; u < K; ++u) {
    if (fb.uniform_row[u]) continue;  // constant row: no parameter dependence
    const double z = fb.row_sum[u];
    // Through row normalization F = E/Z:
    //   dL/dE[a] = (dF[a] - sum_b dF[b] F[b]) / Z.
    const double dot = fb.matrix.row(u).dot(upstream.row(u));
    for (int a = 0; a < D; ++a) {
      const double e = fb.matrix(u, a) * z;  // unnormalized Gaussian value
      const double de = (upstream(u, a) - dot) / z;
      const double d = (a + 1.0) - fb.centers[u];
      g.d_centers[u] += de * e * d * inv_s2;
      g.d_sigma += de * e * d * d * inv_s3;
    }
  }
  return g;
}

namespace {

// Chain center/sigma cotangents through Eqs. of the grid placement and
// the exp maps down to the raw parameter 5-tuple.
AttentionParams chain_to_raw(const FilterbankGrad& gp_grad,
                             const FilterbankGrad& gq_grad, double d_beta,
                             const GridSpec& spec, const FrameGeometry& geom,
                             const GridPolicy& policy) {
  const int K = geom.K;
  const int points = divisor_points(geom, policy);
  double d_gp = 0.0, d_gq = 0.0, d_delta = 0.0;
  for (int u = 0; u < K; ++u) {
    const double off = grid_offset(u, points);
    d_gp += gp_grad.d_centers[u];
    d_gq += gq_grad.d_centers[u];
    d_delta += off * (gp_grad.d_centers[u] + gq_grad.d_centers[u]);
  }
  const double d_sigma = gp_grad.d_sigma + gq_grad.d_sigma;
  AttentionParams d_raw;
  d_raw.gp_raw = d_gp * 0.5 * (geom.A + 1.0);
  d_raw.gq_raw = d_gq * 0.5 * (geom.B + 1.0);
  d_raw.log_delta_raw = d_delta * spec.delta;  // delta = scale * exp(raw)
  d_raw.log_sigma = d_sigma * spec.sigma;
  d_raw.log_beta = d_beta * spec.beta;
  return d_raw;
}

}  // namespace

ReadGrad read_attention_backward(const FrameAttention& fa, const Matrix& frame,
                                 const Matrix& upstream,
                                 const FrameGeometry& geom,
                                 const GridPolicy& policy) {
  const Matrix& Fp = fa.fp.matrix;
  const Matrix& Fq = fa.fq.matrix;
  const double beta = fa.spec.beta;
  // patch = beta * Fp * frame * Fq^T
  const Matrix mixed = Fp * frame;                       // K x B
  const Matrix unscaled = mixed * Fq.transpose();        // K x K
  const double d_beta = (upstream.array() * unscaled.array()).sum();
  const Matrix dFp = beta * upstream * (Fq * frame.transpose());  // K x A
  const Matrix dFq = beta * upstream.transpose() * mixed;         // K x B
  ReadGrad g;
  g.d_frame = beta * Fp.transpose() * upstream * Fq;  // A x B
  const FilterbankGrad gp = filterbank_backward(fa.fp, dFp);
  const FilterbankGrad gq = filterbank_backward(fa.fq, dFq);
  g.d_raw = chain_to_raw(gp, gq, d_beta, fa.spec, geom, policy);
  return g;
}

WriteGrad write_attention_backward(const FrameAttention& fa,
                                   const Matrix& window,
                                   const Matrix& upstream,
                                   const FrameGeometry& geom,
                                   const GridPolicy& policy) {
  const Matrix& Fp = fa.fp.matrix;
  const Matrix& Fq = fa.fq.matrix;
  const double inv_b = 1.0 / fa.spec.beta;
  // out = (1/beta) * Fp^T * window * Fq
  const Matrix wfq = window * Fq;                    // K x B
  const Matrix unscaled = Fp.transpose() * wfq;      // A x B
  const double d_beta =
      -inv_b * inv_b * (upstream.array() * unscaled.array()).sum();
  WriteGrad g;
  g.d_window = inv_b * Fp * upstream * Fq.transpose();       // K x K
  const Matrix dFp = inv_b * wfq * upstream.transpose();     // K x A
  const Matrix dFq = inv_b * window.transpose() * Fp * upstream;  // K x B
  const FilterbankGrad gp = filterbank_backward(fa.fp, dFp);
  const FilterbankGrad gq = filterbank_backward(fa.fq, dFq);
  g.d_raw = chain_to_raw(gp, gq, d_beta, fa.spec, geom, policy);
  return g;
}

TemporalSpec map_temporal_params(const TemporalParams& raw, int frame_count,
                                 int grid_size) {
  if (!std::isfinite(raw.gz_raw) || !std::isfinite(raw.log_sigma) ||
      !std::isfinite(raw.log_delta_raw))
    throw ParamError("map_temporal_params: non-finite parameter");
  TemporalSpec spec;
  spec.gz = 0.5 * (frame_count + 1.0) * (raw.gz_raw + 1.0);
  spec.delta = grid_size > 1 ? (frame_count - 1.0) / (grid_size - 1.0) *
                                   std::exp(raw.log_delta_raw)
                             : 0.0;
  spec.sigma = std::exp(raw.log_sigma);
  return spec;
}

CuboidAttention make_cuboid_attention(const AttentionParams& raw,
                                      const TemporalParams& traw,
                                      const FrameGeometry& geom, int grid_size,
                                      const GridPolicy& policy) {
  CuboidAttention ca;
  ca.raw = raw;
  ca.traw = traw;
  ca.spec = map_params(raw, geom, policy);
  auto [mu_p, mu_q] = grid_centers(ca.spec, geom, policy);
  ca.fp = build_filterbank(mu_p, ca.spec.sigma, geom.A);
  ca.fq = build_filterbank(mu_q, ca.spec.sigma, geom.B);
  ca.tspec = map_temporal_params(traw, geom.N, grid_size);
  ca.fz = build_temporal_filterbank(ca.tspec.gz, ca.tspec.sigma,
                                    ca.tspec.delta, grid_size, geom.N);
  return ca;
}

namespace {

TemporalParams chain_temporal_to_raw(const FilterbankGrad& gz_grad,
                                     const TemporalSpec& tspec,
                                     int frame_count, int grid_size) {
  double d_gz = 0.0, d_delta = 0.0;
  for (int u = 0; u < grid_size; ++u) {
    d_gz += gz_grad.d_centers[u];
    d_delta += grid_offset(u, grid_size) * gz_grad.d_centers[u];
  }
  TemporalParams d;
  d.gz_raw = d_gz * 0.5 * (frame_count + 1.0);
  d.log_delta_raw = d_delta * tspec.delta;
  d.log_sigma = gz_grad.d_sigma * tspec.sigma;
  return d;
}

}  // namespace

CuboidReadGrad cuboid_read_backward(const CuboidAttention& ca,
                                    const std::vector<Matrix>& video,
                                    const std::vector<Matrix>& upstream,
                                    const FrameGeometry& geom,
                                    const GridPolicy& policy) {
  const Matrix& Fp = ca.fp.matrix;
  const Matrix& Fq = ca.fq.matrix;
  const Matrix& Fz = ca.fz.matrix;
  const double beta = ca.spec.beta;
  const int N = ca.fz.axis_len();
  const int Kt = ca.fz.grid_size();
  if (static_cast<int>(upstream.size()) != Kt)
    throw ShapeError("cuboid_read_backward: need one cotangent per patch");

  Matrix dFp = Matrix::Zero(Fp.rows(), Fp.cols());
  Matrix dFq = Matrix::Zero(Fq.rows(), Fq.cols());
  Matrix dFz = Matrix::Zero(Kt, N);
  double d_beta = 0.0;
  CuboidReadGrad g;
  g.d_video.assign(N, Matrix::Zero(geom.A, geom.B));

  for (int t = 0; t < Kt; ++t) {
    Matrix mixed_frame = Matrix::Zero(geom.A, geom.B);
    for (int i = 0; i < N; ++i)
      mixed_frame.noalias() += Fz(t, i) * video[i];
    const Matrix mixed = Fp * mixed_frame;  // K x B
    d_beta += (upstream[t].array() * (mixed * Fq.transpose()).array()).sum();
    dFp.noalias() += beta * upstream[t] * (Fq * mixed_frame.transpose());
    dFq.noalias() += beta * upstream[t].transpose() * mixed;
    const Matrix d_mixed_frame = beta * Fp.transpose() * upstream[t] * Fq;
    for (int i = 0; i < N; ++i) {
      dFz(t, i) = (d_mixed_frame.array() * video[i].array()).sum();
      g.d_video[i].noalias() += Fz(t, i) * d_mixed_frame;
    }
  }

  const FilterbankGrad gp = filterbank_backward(ca.fp, dFp);
  const FilterbankGrad gq = filterbank_backward(ca.fq, dFq);
  const FilterbankGrad gz = filterbank_backward(ca.fz, dFz);
  g.d_raw = chain_to_raw(gp, gq, d_beta, ca.spec, geom, policy);
  g.d_traw = chain_temporal_to_raw(gz, ca.tspec, N, Kt);
  return g;
}

CuboidWriteGrad cuboid_write_backward(const CuboidAttention& ca,
                                      const std::vector<Matrix>& windows,
                                      const std::vector<Matrix>& upstream,
                                      const FrameGeometry& geom,
                                      const GridPolicy& policy) {
  const Matrix& Fp = ca.fp.matrix;
  const Matrix& Fq = ca.fq.matrix;
  const Matrix& Fz = ca.fz.matrix;
  const double inv_b = 1.0 / ca.spec.beta;
  const int N = ca.fz.axis_len();
  const int Kt = ca.fz.grid_size();
  if (static_cast<int>(upstream.size()) != N)
    throw ShapeError("cuboid_write_backward: need one cotangent per frame");

  Matrix dFp = Matrix::Zero(Fp.rows(), Fp.cols());
  Matrix dFq = Matrix::Zero(Fq.rows(), Fq.cols());
  Matrix dFz = Matrix::Zero(Kt, N);
  double d_beta = 0.0;
  CuboidWriteGrad g;
  g.d_windows.assign(Kt, Matrix::Zero(geom.K, geom.K));

  for (int t = 0; t < Kt; ++t) {
    const Matrix wfq = windows[t] * Fq;              // K x B
    const Matrix unscaled = Fp.transpose() * wfq;    // A x B
    // Sum the per-frame cotangents weighted by the temporal profile.
    Matrix du = Matrix::Zero(geom.A, geom.B);
    for (int i = 0; i < N; ++i) {
      const double dot = (upstream[i].array() * unscaled.array()).sum();
      dFz(t, i) = inv_b * dot;
      d_beta += -inv_b * inv_b * Fz(t, i) * dot;
      du.noalias() += Fz(t, i) * upstream[i];
    }
    g.d_windows[t] = inv_b * Fp * du * Fq.transpose();
    dFp.noalias() += inv_b * wfq * du.transpose();
    dFq.noalias() += inv_b * windows[t].transpose() * Fp * du;
  }

  const FilterbankGrad gp = filterbank_backward(ca.fp, dFp);
  const FilterbankGrad gq = filterbank_backward(ca.fq, dFq);
  const FilterbankGrad gz = filterbank_backward(ca.fz, dFz);
  g.d_raw = chain_to_raw(gp, gq, d_beta, ca.spec, geom, policy);
  g.d_traw = chain_temporal_to_raw(gz, ca.tspec, N, Kt);
  return g;
}

}  // namespace syncdraw
