#pragma once

#include <cmath>

// dB/dBm live at the configuration boundary only; everything in memory is
// linear scale, with powers in milliwatts so that dBm converts as 10^(x/10).

namespace fdisac {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

// Amplitude scale for a power attenuation given in dB: |a| = 10^(db/20).
inline double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }

}  // namespace fdisac
