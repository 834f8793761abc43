#pragma once

namespace minmeas {

/// Selects between the OpenMP kernels and their serial reference versions.
/// Both produce bit-identical results: parallel loops write to disjoint
/// slots and every reduction is finished serially in index order.
enum class Exec { serial, parallel };

}  // namespace minmeas
