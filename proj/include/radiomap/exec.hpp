#pragma once

namespace radiomap {

// Execution policy for the data-parallel kernels. `serial` is the reference
// path; `parallel` must produce bit-identical results.
enum class Exec { serial, parallel };

}  // namespace radiomap
