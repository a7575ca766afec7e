#pragma once

#include <string>
#include <vector>

namespace mpmab {

// One line on a plot. `stddev` draws a +/- one-deviation band when it has
// the same length as `mean`; leave it empty for a bare line.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> stddev;
};

struct PlotOptions {
  std::string title;
  std::string x_label = "t";
  std::string y_label = "cumulative regret";
  int width = 800;
  int height = 520;
  bool log_y = false;
};

// Renders a self-contained SVG document. Deterministic: the same inputs
// produce byte-identical output. With no points it still draws the frame.
std::string render_line_plot(const std::vector<PlotSeries>& series,
                             const PlotOptions& options);

// Builds one series per (protocol, environment) pair from aggregate CSV
// text (header: protocol,environment,checkpoint_t,mean_regret,std_regret,
// n_runs). Throws std::invalid_argument on malformed input.
std::string plot_from_aggregate_csv(const std::string& csv_text,
                                    const PlotOptions& options);

}  // namespace mpmab
