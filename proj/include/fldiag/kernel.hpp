// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "fldiag/matrix.hpp"

namespace fldiag {

/// Gram matrix with sample-set identities and provenance. Square kernels are
/// symmetric PSD up to roundoff.
struct KernelMatrix {
    Matrix entries;
    std::string left_id;
    std::string right_id;
    std::string provenance;

    bool square() const { return entries.rows() == entries.cols(); }
};

/// Persist as entries.bin (matrix format) plus meta.toml sidecar.
void save_kernel(const KernelMatrix& k, const std::string& dir);
KernelMatrix load_kernel(const std::string& dir);

} // namespace fldiag
