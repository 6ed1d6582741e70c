#ifndef IVNNT_SVG_HPP
#define IVNNT_SVG_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace ivnnt {

// one box slot: estimates for a (sample size, method) pair; non-finite
// estimates are not drawn, their count is annotated above the slot
struct BoxGroup {
  std::size_t n = 0;
  int method = 0;  // 0 = iv, 1 = baseline
  std::vector<double> estimates;
};

// grouped boxplot (median, quartiles, 1.5*IQR whiskers, outlier dots) with a
// dashed horizontal truth line; self-contained SVG, no external resources
std::string boxplot_svg(const std::string& title, const std::string& y_label, double truth,
                        const std::vector<BoxGroup>& groups);

}  // namespace ivnnt

#endif
