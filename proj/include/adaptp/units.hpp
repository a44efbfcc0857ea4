// Units - aviation/SI conversion constants
// Part of adaptp - adaptive climb/descent trajectory prediction
#pragma once

namespace adaptp::units {

inline constexpr double kFtToM = 0.3048;
inline constexpr double kMToFt = 1.0 / kFtToM;
inline constexpr double kNmiToM = 1852.0;
inline constexpr double kKtToMps = kNmiToM / 3600.0;
inline constexpr double kMpsToKt = 1.0 / kKtToMps;
inline constexpr double kMpsToFtPerMin = 60.0 * kMToFt;
inline constexpr double kFtPerMinToMps = 1.0 / kMpsToFtPerMin;

/// Nautical miles flown in `seconds` at `tas_kt`.
constexpr double nmi_flown(double tas_kt, double seconds) {
    return tas_kt * seconds / 3600.0;
}

} // namespace adaptp::units
