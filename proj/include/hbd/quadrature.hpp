/*
   Copyright 2026 The hbdlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <functional>
#include <vector>

#include "hbd/foliation.hpp"

namespace hbd {

// n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussLegendreRule gauss_legendre(int n);

// Composite rule: a flat list of nodes and weights plus the panel edges it was built on.
struct NodeSet {
    std::vector<double> x;
    std::vector<double> w;
    std::vector<double> edges;
    int order = 0;

    double integrate(const std::function<double(double)>& fn) const;
};

NodeSet composite_rule(const std::vector<double>& edges, int order);
NodeSet uniform_rule(Interval range, int panels, int order);

// Splits panels until the order-q rule on a panel agrees with the order-q rule on its
// two halves to abs_tol (scaled by the running integral of |fn|).
NodeSet adaptive_rule(const std::function<double(double)>& fn, Interval range, int order,
                      double rel_tol, int initial_panels = 32, int max_depth = 12,
                      std::vector<double> forced_edges = {});

} // namespace hbd
