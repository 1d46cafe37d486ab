#pragma once

#include <cstddef>
#include <vector>

#include "csw/dataio.hpp"
#include "csw/distances.hpp"

namespace csw {

// Class-by-class distance matrix. Off-diagonal entries compare the
// per_class-sized samples of two classes; diagonal entries compare the two
// disjoint halves of one class. Repetition r reuses the split and draws
// projections from derive_seed(spec.seed, r). Monte Carlo methods project
// each selected image once per projection and reuse it for every pair, so
// entry (i, j) equals distance(sample_i, sample_j, spec) bit for bit.
DistanceMatrixReport compare_classes(const LabeledDataset& dataset, const MethodSpec& spec,
                                     std::size_t per_class, std::size_t repeats,
                                     unsigned threads = 0);

// Matrix for already-split classes (one repetition, seed taken from spec).
std::vector<std::vector<double>> class_distance_matrix(const std::vector<ClassSplit>& splits,
                                                       const MethodSpec& spec,
                                                       unsigned threads = 0);

}  // namespace csw
