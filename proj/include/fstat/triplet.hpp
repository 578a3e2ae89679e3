#pragma once

#include <vector>

#include "fstat/batch.hpp"

namespace fse {

// Mean hinge loss over all (anchor, positive, negative) triplets in the batch:
// max(0, ||a-p|| - ||a-n|| + margin), plain L2 distances. Anchor/positive are
// ordered pairs with a shared label; the negative ranges over every instance
// of a different label.
double triplet_loss(const LabeledEmbeddingBatch& batch, double margin);

// Subgradient of triplet_loss, flat row-major. The distance gradient at
// coincident points is taken to be zero.
std::vector<double> triplet_loss_grad(const LabeledEmbeddingBatch& batch, double margin);

}  // namespace fse
