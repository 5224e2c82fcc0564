#pragma once

#include <string>
#include <vector>

#include "acs/autodiff.hpp"
#include "acs/linalg.hpp"

namespace acs {

// Common surface the training loop needs from either decoder. Parameters are
// owned by the decoder; the loop mutates them through params() under a
// single-writer contract.
class Decoder {
 public:
  virtual ~Decoder() = default;

  virtual std::string kind() const = 0;

  // Trainable tensors, in a fixed order matching build_loss's returned ids.
  virtual std::vector<Matrix*> params() = 0;

  // Records the batched forward + MSE loss on the tape. Returns the loss node
  // and the parameter node ids (same order as params()).
  virtual int build_loss(ad::Tape& tape, const Matrix& y_cols,
                         const Matrix& x_cols,
                         std::vector<int>& param_nodes) const = 0;

  // Plain (untaped) batched reconstruction; columns are samples.
  virtual Matrix decode_batch(const Matrix& y_cols) const = 0;

  // Constraint hook applied after each optimizer step.
  virtual void post_update() {}
};

}  // namespace acs
