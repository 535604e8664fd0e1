#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecgraph/render.hpp"

namespace ecgraph {

// Seeded demo/benchmark signal source for the chart renderer: every lead
// gets a waveform sized to its band so rendering stays inside the rows
// unless a crossing is asked for explicitly.

enum class WaveKind { Sine, Square, Composite, Mix };

const char* wave_kind_name(WaveKind k);
WaveKind parse_wave_kind(const std::string& name); // UnknownOp on bad names

// Samples a band produces at the calibration's pixels-per-sample.
int band_sample_count(const LeadBand& band, const CalibrationConfig& cal);

// Largest deflection (mV) that stays margin_px inside the band rows.
double band_amplitude_limit_mv(const LeadBand& band, const CalibrationConfig& cal,
                               int margin_px = 4);

// One full page of in-band waveforms. Mix cycles through the kinds by band.
SignalRecord make_waveform_record(const LayoutConfig& layout, const CalibrationConfig& cal,
                                  WaveKind kind, std::uint64_t seed);

// A page where some leads dive into the band below and graze its flat
// neighbor's line, producing genuine shared-pixel crossings. Within every
// column of bands, leads at positions 1, 4, 7, ... dip onto the flat lead
// directly beneath; remaining leads carry small sines.
struct CrossingChart {
  SignalRecord record;
  std::vector<Lead> dippers; // leads that leave their band
  std::vector<Lead> targets; // flat leads that get grazed
};

CrossingChart make_crossing_record(const LayoutConfig& layout, const CalibrationConfig& cal,
                                   std::uint64_t seed);

} // namespace ecgraph
