#include <chrono>
#include <cmath>
#include <cstdio>

#include "roughbattery/random.hpp"
#include "roughbattery/table.hpp"

namespace roughbattery::tabular {

namespace {

constexpr double kWaterTempMin = 9.1, kWaterTempMax = 31.5;
constexpr double kTurbidityMin = 0.01, kTurbidityMax = 1683.48;
constexpr double kDepthMin = -0.082, kDepthMax = 2.214;
constexpr double kWaveHeightMin = 0.013, kWaveHeightMax = 1.467;
constexpr double kWavePeriodMin = 1.0, kWavePeriodMax = 10.0;
constexpr double kBatteryMin = 4.8, kBatteryMax = 13.3;

std::string hourly_timestamp(std::size_t hours_after_start) {
  using namespace std::chrono;
  // first measurement of the published snapshot: 2013-08-30 08:00
  const sys_days start = year{2013} / August / 30;
  const auto t = start + hours{8} + hours{static_cast<long>(hours_after_start)};
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const auto hour = duration_cast<hours>(t - day).count();
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02ld:00:00", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hour));
  return buf;
}

}  // namespace

std::vector<ColumnSchema> beach_schema() {
  return {
      {"Beach Name", ColumnKind::categorical, "text", std::nullopt},
      {"Measurement Timestamp", ColumnKind::timestamp, "datetime", std::nullopt},
      {"Water Temperature", ColumnKind::numeric, "degC", std::pair{kWaterTempMin, kWaterTempMax}},
      {"Turbidity", ColumnKind::numeric, "NTU", std::pair{kTurbidityMin, kTurbidityMax}},
      {"Transducer Depth", ColumnKind::numeric, "m", std::pair{kDepthMin, kDepthMax}},
      {"Wave Height", ColumnKind::numeric, "m", std::pair{kWaveHeightMin, kWaveHeightMax}},
      {"Wave Period", ColumnKind::numeric, "s", std::pair{kWavePeriodMin, kWavePeriodMax}},
      {"Battery Life", ColumnKind::numeric, "V", std::pair{kBatteryMin, kBatteryMax}},
  };
}

std::vector<ColumnSchema> beach_portal_schema() {
  auto schema = beach_schema();
  schema.push_back({"Measurement Timestamp Label", ColumnKind::timestamp, "text", std::nullopt});
  schema.push_back({"Measurement ID", ColumnKind::timestamp, "text", std::nullopt});
  return schema;
}

const std::vector<std::string>& beach_names() {
  static const std::vector<std::string> names{
      "63rd Street Beach", "Calumet Beach",  "Montrose Beach",
      "Ohio Street Beach", "Osterman Beach", "Rainbow Beach",
  };
  return names;
}

std::vector<std::string> planted_signal_columns() {
  return {"Beach Name", "Water Temperature", "Wave Height"};
}

std::vector<std::string> planted_noise_columns() {
  return {"Turbidity", "Transducer Depth", "Wave Period"};
}

DataTable synth_generate(std::size_t n_rows, std::uint64_t seed) {
  Rng rng(seed);
  const auto& beaches = beach_names();
  const double log_turb_lo = std::log(kTurbidityMin);
  const double log_turb_hi = std::log(kTurbidityMax);

  std::vector<std::vector<Cell>> rows;
  rows.reserve(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) {
    const auto beach = rng.below(beaches.size());
    const double water = rng.uniform(kWaterTempMin, kWaterTempMax);
    const double turbidity = std::min(kTurbidityMax, std::exp(rng.uniform(log_turb_lo, log_turb_hi)));
    const double depth = rng.uniform(kDepthMin, kDepthMax);
    const double wave_h = rng.uniform(kWaveHeightMin, kWaveHeightMax);
    const double period = rng.uniform(kWavePeriodMin, kWavePeriodMax);
    const double noise = rng.uniform(-0.25, 0.25);

    const double t = (water - kWaterTempMin) / (kWaterTempMax - kWaterTempMin);
    const double h = (wave_h - kWaveHeightMin) / (kWaveHeightMax - kWaveHeightMin);
    const double battery = 5.5 + 3.0 * t + 2.0 * h + 0.4 * static_cast<double>(beach) + noise;

    rows.push_back({beaches[beach], hourly_timestamp(i), water, turbidity, depth, wave_h, period,
                    battery});
  }
  return DataTable(beach_schema(), std::move(rows));
}

}  // namespace roughbattery::tabular
