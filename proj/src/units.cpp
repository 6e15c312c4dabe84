#include "ppe/units.hpp"

#include <cmath>

namespace ppe {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

double dbm_to_watts(double dbm) { return 1e-3 * db_to_linear(dbm); }

double watts_to_dbm(double watts) { return linear_to_db(watts / 1e-3); }

double alpha_to_per_meter(double alpha_db_per_km) { return alpha_db_per_km * std::log(10.0) / 10.0 / 1000.0; }

double alpha_to_db_per_km(double alpha_per_m) { return alpha_per_m * 1000.0 * 10.0 / std::log(10.0); }

}  // namespace ppe
