#pragma once

namespace roughbattery {

/// Selects between the OpenMP kernel and its serial reference. Both paths
/// produce identical results; the serial one is kept for testing and benchmarks.
enum class Exec { serial, parallel };

}  // namespace roughbattery
