#ifndef N400_SVG_HPP
#define N400_SVG_HPP

#include <iosfwd>

#include "n400/pipeline.hpp"

namespace n400 {

// Self-contained SVG renderings of the report tables. Presentation only;
// the CSV tables are the contract.
void write_aic_figure(const LadderReport& report, std::ostream& os);
void write_conditions_figure(const HoldoutReport& report, std::ostream& os);
void write_scatter_figure(const CorrelationReport& report, std::ostream& os);

} // namespace n400

#endif
