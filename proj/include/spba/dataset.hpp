#pragma once

#include <cstddef>
#include <vector>

namespace spba {

// Query history (x_i, a_i, B_i). Repeated sites are merged by summing a and B
// so surrogate design matrices stay full rank.
struct Dataset {
  std::vector<double> x;
  std::vector<int> a;
  std::vector<int> b;

  std::size_t size() const { return x.size(); }
  bool empty() const { return x.empty(); }

  void add(double site, int replicates, int positives) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] == site) {
        a[i] += replicates;
        b[i] += positives;
        return;
      }
    }
    x.push_back(site);
    a.push_back(replicates);
    b.push_back(positives);
  }
};

}  // namespace spba
