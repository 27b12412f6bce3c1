#pragma once

namespace chartpulse {

/// Selects between the serial reference loop and the OpenMP loop of a kernel.
/// Both produce the same result up to floating-point summation order.
enum class Exec { serial, parallel };

/// Number of threads the parallel kernels will use (1 without OpenMP).
int parallel_threads();

}  // namespace chartpulse
