#pragma once

// CSV emission with stable, versioned schemas. Numbers are printed with %.17g
// so identical runs produce byte-identical files.

#include "dephmix/analytic.hpp"
#include "dephmix/core.hpp"
#include "dephmix/divisibility.hpp"
#include "dephmix/integrate.hpp"
#include "dephmix/triangle.hpp"

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace dephmix {

inline constexpr const char* kSchemaVersion = "1";
inline constexpr const char* kEvolveHeader = "t,p0,p1,p2,p3,b1,b2,b3";
inline constexpr const char* kRatesHeader = "t,gamma1,gamma2,gamma3,mu1,mu2,mu3";
inline constexpr const char* kTriangleHeader = "x1,x2,x3,t,status";
inline constexpr const char* kClassifyHeader = "t,cpt,cp_div,p_div,blp,geometric";
inline constexpr const char* kBoundaryHeader = "x1,x2,x3,branch,cubic_x,cubic_y";

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_evolve_csv(std::ostream& os, const TrajectoryRecord& rec) {
  os << kEvolveHeader << "\n";
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    os << format_double(rec.times[i]);
    if (i < rec.probs.size()) {
      for (int j = 0; j < 4; ++j) os << ',' << format_double(rec.probs[i][j]);
    } else {
      os << ",nan,nan,nan,nan";
    }
    const BlochVector b = to_bloch(rec.states[i]);
    os << ',' << format_double(b.b1) << ',' << format_double(b.b2) << ','
       << format_double(b.b3) << "\n";
  }
}

inline void write_rates_csv(std::ostream& os, const MixtureWeights& x, const TimeGrid& grid) {
  os << kRatesHeader << "\n";
  for (int m = 0; m < grid.size(); ++m) {
    const RateDiagnostics r = rates(x, grid.time(m));
    os << format_double(r.t) << ',' << format_double(r.gamma1) << ',' << format_double(r.gamma2)
       << ',' << format_double(r.gamma3) << ',' << format_double(r.mu1) << ','
       << format_double(r.mu2) << ',' << format_double(r.mu3) << "\n";
  }
}

inline void write_triangle_csv(std::ostream& os, const std::vector<RegionCell>& cells,
                               double t) {
  os << kTriangleHeader << "\n";
  for (const auto& c : cells)
    os << format_double(c.x.x1) << ',' << format_double(c.x.x2) << ',' << format_double(c.x.x3)
       << ',' << format_double(t) << ',' << to_string(c.status) << "\n";
}

inline void write_classify_csv(std::ostream& os, const DivisibilityReport& rep) {
  os << kClassifyHeader << "\n";
  for (int m = 0; m < rep.grid.size(); ++m)
    os << format_double(rep.grid.time(m)) << ',' << rep.cpt[m] << ',' << rep.cp_divisible[m]
       << ',' << rep.p_divisible[m] << ',' << rep.blp_monotone[m] << ','
       << rep.geometric_markov[m] << "\n";
}

inline void write_boundary_csv(std::ostream& os, const std::vector<BoundaryPoint>& pts) {
  os << kBoundaryHeader << "\n";
  for (const auto& p : pts)
    os << format_double(p.x.x1) << ',' << format_double(p.x.x2) << ',' << format_double(p.x.x3)
       << ',' << p.branch << ',' << format_double(p.cubic_x) << ','
       << format_double(p.cubic_y) << "\n";
}

}  // namespace dephmix
