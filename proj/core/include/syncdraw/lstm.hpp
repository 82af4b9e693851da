#pragma once

#include "syncdraw/linalg.hpp"

namespace syncdraw {

struct RecurrentState {
  Vector h;
  Vector c;

  static RecurrentState zero(int width) {
    return {Vector::Zero(width), Vector::Zero(width)};
  }
};

/// Everything the backward pass needs from one gated-recurrence step.
struct LstmCache {
  Vector x;
  Vector h_prev, c_prev;
  Vector i, f, g, o;  // gate activations
  Vector c, h;
};

/// One LSTM step. Gate rows of Wx/Wh/b are packed [input | forget |
/// cell | output]. `Wx` is (4H x X), `Wh` is (4H x H), `b` is (4H x 1).
RecurrentState lstm_step(const Matrix& Wx, const Matrix& Wh, const Matrix& b,
                         const Vector& x, const RecurrentState& prev,
                         LstmCache* cache = nullptr);

struct LstmStepGrad {
  Vector dx;
  Vector dh_prev, dc_prev;
};

/// Backward through one step. Accumulates weight gradients into
/// dWx/dWh/db (which must already have the right shapes) and returns
/// the input-side cotangents.
LstmStepGrad lstm_backward(const Matrix& Wx, const Matrix& Wh,
                           const LstmCache& cache, const Vector& dh,
                           const Vector& dc, Matrix& dWx, Matrix& dWh,
                           Matrix& db);

}  // namespace syncdraw
