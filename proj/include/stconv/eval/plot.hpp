#pragma once

#include <string>
#include <vector>

#include "stconv/tensor.hpp"

namespace stconv::eval {

/// `video_id,x,y,class` rows for an [N, 2] embedding.
std::string format_embedding_csv(const Tensor& embedding, const std::vector<std::string>& ids,
                                 const std::vector<int>& classes);

/// Self-contained SVG scatter plot, one color per class.
std::string render_scatter_svg(const Tensor& embedding, const std::vector<int>& classes,
                               const std::string& title);

}  // namespace stconv::eval
