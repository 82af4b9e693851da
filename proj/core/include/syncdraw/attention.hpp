#pragma once

#include <utility>
#include <vector>

#include "syncdraw/linalg.hpp"

namespace syncdraw {

/// Convention switch for the grid formulas. The default places the
/// attention grid using the grid size K as the divisor in the center
/// offsets and the stride scale; setting `frame_count_divisor` uses the
/// frame count N instead, matching the printed formulas literally.
struct GridPolicy {
  bool frame_count_divisor = false;
};

struct FrameGeometry {
  int A = 0;  ///< frame height in pixels
  int B = 0;  ///< frame width in pixels
  int N = 0;  ///< frames per video
  int K = 0;  ///< attention grid size (filters per spatial axis)

  void validate() const;
};

/// Raw (unconstrained) attention parameters for one frame at one
/// timestep. The scale parameters live in log space so that the mapped
/// values are strictly positive.
struct AttentionParams {
  double gp_raw = 0.0;
  double gq_raw = 0.0;
  double log_sigma = 0.0;
  double log_delta_raw = 0.0;
  double log_beta = 0.0;
};

/// Mapped grid placement in pixel coordinates.
struct GridSpec {
  double gp = 0.0;     ///< grid center, vertical axis (1-based pixels)
  double gq = 0.0;     ///< grid center, horizontal axis
  double delta = 0.0;  ///< stride between grid points, pixels
  double sigma = 0.0;  ///< Gaussian std-dev, pixels
  double beta = 0.0;   ///< frame weight
};

/// K normalized Gaussian rows over a length-D axis. Row u integrates
/// to 1 and is centered at `centers[u]`; rows whose unnormalized sum
/// falls below the guard (grid far outside the frame) are replaced by
/// the uniform row 1/D and flagged.
struct Filterbank {
  Matrix matrix;                     ///< K x D, rows sum to 1
  Vector centers;                    ///< K centers (1-based pixel space)
  Vector row_sum;                    ///< unnormalized row sums Z_u
  std::vector<std::uint8_t> uniform_row;  ///< fallback flags
  double sigma = 0.0;

  int grid_size() const { return static_cast<int>(matrix.rows()); }
  int axis_len() const { return static_cast<int>(matrix.cols()); }
};

inline constexpr double kRowSumGuard = 1e-8;

/// Map raw parameters into the frame:
///   gp = (A+1)/2 (gp_raw + 1),  gq = (B+1)/2 (gq_raw + 1),
///   delta = (max(A,B)-1)/(K-1) exp(log_delta_raw)   (0 when K == 1),
///   sigma = exp(log_sigma),  beta = exp(log_beta).
GridSpec map_params(const AttentionParams& raw, const FrameGeometry& geom,
                    const GridPolicy& policy = {});

/// Filter centers mu[u] = g + (u - K/2 - 0.5) delta for u = 1..K, for
/// both axes.
std::pair<Vector, Vector> grid_centers(const GridSpec& spec,
                                       const FrameGeometry& geom,
                                       const GridPolicy& policy = {});

/// Row-normalized Gaussian filter matrix over axis positions 1..D.
Filterbank build_filterbank(const Vector& centers, double sigma, int D);

/// Temporal filterbank of the cuboid baseline: the same construction
/// over the frame-index axis 1..N with a K_t-point grid.
Filterbank build_temporal_filterbank(double center, double sigma, double delta,
                                     int grid_size, int frame_count);

/// Glimpse extraction: beta * Fp * frame * Fq^T, a K x K patch.
Matrix read_patch(const Filterbank& fp, const Filterbank& fq, double beta,
                  const Matrix& frame);

/// Canvas contribution: (1/beta_hat) * Fp^T * window * Fq, an A x B image.
Matrix write_patch(const Filterbank& fp_hat, const Filterbank& fq_hat,
                   double beta_hat, const Matrix& window);

/// Cuboid read: project the video through the temporal filterbank, then
/// read each of the K_t mixed frames spatially. Returns K_t patches.
std::vector<Matrix> read_cuboid(const Filterbank& fp, const Filterbank& fq,
                                const Filterbank& fz, double beta,
                                const std::vector<Matrix>& video);

/// Cuboid write: transpose composition, spreading K_t windows over the
/// N frames through the temporal filterbank, scaled by 1/beta_hat.
std::vector<Matrix> write_cuboid(const Filterbank& fp, const Filterbank& fq,
                                 const Filterbank& fz, double beta_hat,
                                 const std::vector<Matrix>& windows);

// ---------------------------------------------------------------------------
// Analytic gradients. Each *_backward routine consumes the cotangent of
// the corresponding forward output and chains it through normalization,
// Gaussian evaluation, the center/stride maps and the exp transforms
// down to the raw parameters (and the frame or window input).

/// Forward bundle for one frame's filter pair; keeps everything the
/// backward pass needs.
struct FrameAttention {
  AttentionParams raw;
  GridSpec spec;
  Filterbank fp;  // K x A
  Filterbank fq;  // K x B
};

FrameAttention make_frame_attention(const AttentionParams& raw,
                                    const FrameGeometry& geom,
                                    const GridPolicy& policy = {});

/// d(loss)/d(centers), d(loss)/d(sigma) for one filterbank given the
/// cotangent of its normalized matrix.
struct FilterbankGrad {
  Vector d_centers;
  double d_sigma = 0.0;
};

FilterbankGrad filterbank_backward(const Filterbank& fb, const Matrix& upstream);

struct ReadGrad {
  AttentionParams d_raw;
  Matrix d_frame;
};

struct WriteGrad {
  AttentionParams d_raw;
  Matrix d_window;
};

ReadGrad read_attention_backward(const FrameAttention& fa, const Matrix& frame,
                                 const Matrix& upstream,
                                 const FrameGeometry& geom,
                                 const GridPolicy& policy = {});

WriteGrad write_attention_backward(const FrameAttention& fa,
                                   const Matrix& window,
                                   const Matrix& upstream,
                                   const FrameGeometry& geom,
                                   const GridPolicy& policy = {});

// ---------------------------------------------------------------------------
// Cuboid-baseline variant: one spatial parameter set shared by all
// frames plus a temporal grid over the frame axis.

struct TemporalParams {
  double gz_raw = 0.0;
  double log_sigma = 0.0;
  double log_delta_raw = 0.0;
};

struct TemporalSpec {
  double gz = 0.0;
  double delta = 0.0;
  double sigma = 0.0;
};

TemporalSpec map_temporal_params(const TemporalParams& raw, int frame_count,
                                 int grid_size);

struct CuboidAttention {
  AttentionParams raw;
  TemporalParams traw;
  GridSpec spec;
  TemporalSpec tspec;
  Filterbank fp;  // K x A
  Filterbank fq;  // K x B
  Filterbank fz;  // K_t x N
};

CuboidAttention make_cuboid_attention(const AttentionParams& raw,
                                      const TemporalParams& traw,
                                      const FrameGeometry& geom, int grid_size,
                                      const GridPolicy& policy = {});

struct CuboidReadGrad {
  AttentionParams d_raw;
  TemporalParams d_traw;
  std::vector<Matrix> d_video;
};

struct CuboidWriteGrad {
  AttentionParams d_raw;
  TemporalParams d_traw;
  std::vector<Matrix> d_windows;
};

CuboidReadGrad cuboid_read_backward(const CuboidAttention& ca,
                                    const std::vector<Matrix>& video,
                                    const std::vector<Matrix>& upstream,
                                    const FrameGeometry& geom,
                                    const GridPolicy& policy = {});

CuboidWriteGrad cuboid_write_backward(const CuboidAttention& ca,
                                      const std::vector<Matrix>& windows,
                                      const std::vector<Matrix>& upstream,
                                      const FrameGeometry& geom,
                                      const GridPolicy& policy = {});

}  // namespace syncdraw
