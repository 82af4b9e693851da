#pragma once

#include <string>
#include <vector>

#include "syncdraw/linalg.hpp"
#include "syncdraw/lstm.hpp"

namespace syncdraw {

enum class MotionClass { kLeftRight = 0, kUpDown = 1 };

struct CaptionSlot {
  int digit = 0;  // 0..9
  MotionClass motion = MotionClass::kLeftRight;

  bool operator==(const CaptionSlot&) const = default;
};

/// Parsed caption: one or two (digit, motion) subjects.
struct CaptionTemplate {
  std::vector<CaptionSlot> slots;

  int arity() const { return static_cast<int>(slots.size()); }
  bool operator==(const CaptionTemplate&) const = default;
};

struct Caption {
  std::string text;
  CaptionTemplate parsed;
};

/// Width of the one-hot embedding: [digit(10) | motion(2)] per subject,
/// two subject blocks, absent second subject left all-zero.
inline constexpr int kOneHotDim = 24;

/// Parse against the closed grammar
///   "digit D is moving left and right" | "digit D is moving up and down"
/// optionally joined once by "and". Whitespace-normalized and
/// case-insensitive. Throws ParseError with the 1-based token position.
CaptionTemplate parse_caption(const std::string& text);

/// Exact surface string for a template; parse_caption inverts it.
std::string render_caption(const CaptionTemplate& t);

/// Deterministic embedding: concatenated one-hot blocks, injective over
/// the grammar.
Vector encode_onehot(const CaptionTemplate& t);

/// Closed vocabulary of the grammar (grammar words plus digits 0-9).
int caption_vocab_size();

/// Token ids of a caption string; throws ParseError on an
/// out-of-vocabulary token.
std::vector<int> caption_tokens(const std::string& text);

/// Trainable sentence encoder: embed each token, run a gated recurrence
/// over the sequence, return the final hidden state (width = Wh.cols()).
/// `emb` is (vocab x embed_dim). Caches, if given, receive one entry
/// per token for the backward pass.
Vector encode_recurrent(const std::vector<int>& tokens, const Matrix& emb,
                        const Matrix& Wx, const Matrix& Wh, const Matrix& b,
                        std::vector<LstmCache>* caches = nullptr);

/// Backprop d(loss)/d(embedding output) through the recurrence into the
/// encoder weights (accumulated in place).
void encode_recurrent_backward(const std::vector<int>& tokens,
                               const Matrix& Wx, const Matrix& Wh,
                               const std::vector<LstmCache>& caches,
                               const Vector& d_s, Matrix& d_emb, Matrix& d_Wx,
                               Matrix& d_Wh, Matrix& d_b);

}  // namespace syncdraw
