#include "syncdraw/lstm.hpp"

#include "syncdraw/errors.hpp"

namespace syncdraw {

RecurrentState lstm_step(const Matrix& Wx, const Matrix& Wh, const Matrix& b,
                         const Vector& x, const RecurrentState& prev,
                         LstmCache* cache) {
  const int H = static_cast<int>(Wh.cols());
  if (Wx.rows() != 4 * H || Wh.rows() != 4 * H || b.rows() != 4 * H)
    throw ShapeError("lstm_step: weight rows must be 4x hidden width");
  if (Wx.cols() != x.size() || prev.h.size() != H || prev.c.size() != H)
    throw ShapeError("lstm_step: input/state width mismatch");

  Vector gates = Wx * x + Wh * prev.h + b.col(0);
  const Vector i = sigmoid(Vector(gates.segment(0, H)));
  const Vector f = sigmoid(Vector(gates.segment(H, H)));
  const Vector g = gates.segment(2 * H, H).array().tanh();
  const Vector o = sigmoid(Vector(gates.segment(3 * H, H)));

  RecurrentState next;
  next.c = (f.array() * prev.c.array() + i.array() * g.array()).matrix();
  next.h = (o.array() * next.c.array().tanh()).matrix();

  if (cache) {
    cache->x = x;
    cache->h_prev = prev.h;
    cache->c_prev = prev.c;
    cache->i = i;
    cache->f = f;
    cache->g = g;
    cache->o = o;
    cache->c = next.c;
    cache->h = next.h;
  }
  return next;
}

LstmStepGrad lstm_backward(const Matrix& Wx, const Matrix& Wh,
                           const LstmCache& cache, const Vector& dh,
                           const Vector& dc_in, Matrix& dWx, Matrix& dWh,
                           Matrix& db) {
  const int H = static_cast<int>(cache.h.size());
  const Eigen::ArrayXd tc = cache.c.array().tanh();

  const Eigen::ArrayXd d_o = dh.array() * tc;
  const Eigen::ArrayXd dc =
      dc_in.array() + dh.array() * cache.o.array() * (1.0 - tc * tc);
  const Eigen::ArrayXd d_i = dc * cache.g.array();
  const Eigen::ArrayXd d_g = dc * cache.i.array();
  const Eigen::ArrayXd d_f = dc * cache.c_prev.array();

  Vector dz(4 * H);
  dz.segment(0, H) = d_i * cache.i.array() * (1.0 - cache.i.array());
  dz.segment(H, H) = d_f * cache.f.array() * (1.0 - cache.f.array());
  dz.segment(2 * H, H) = d_g * (1.0 - cache.g.array().square());
  dz.segment(3 * H, H) = d_o * cache.o.array() * (1.0 - cache.o.array());

  dWx.noalias() += dz * cache.x.transpose();
  dWh.noalias() += dz * cache.h_prev.transpose();
  db.col(0) += dz;

  LstmStepGrad g;
  g.dx = Wx.transpose() * dz;
  g.dh_prev = Wh.transpose() * dz;
  g.dc_prev = (dc * cache.f.array()).matrix();
  return g;
}

}  // namespace syncdraw
