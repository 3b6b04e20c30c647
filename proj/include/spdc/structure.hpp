#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "materials.hpp"

namespace spdc {

struct Layer {
  MaterialModel material;
  double length = 0.0;  // metres
  int poling = +1;      // sign applied to chi2
};

/// Ordered stack of N layers between two semi-infinite ambient media.
/// Media are indexed 0..N+1 (0 = input ambient, N+1 = output ambient);
/// boundaries z_1..z_{N+1} with z_1 = 0, z_{l+1} - z_l = L_l.
class StructureSpec {
 public:
  StructureSpec(MaterialModel ambient_in, std::vector<Layer> layers, MaterialModel ambient_out)
      : layers_(std::move(layers)) {
    if (layers_.empty()) throw ConfigError("structure needs at least one layer");
    for (std::size_t j = 0; j < layers_.size(); ++j) {
      if (!(layers_[j].length > 0.0))
        throw ConfigError("layer " + std::to_string(j + 1) + " has non-positive length");
      if (layers_[j].poling != 1 && layers_[j].poling != -1)
        throw ConfigError("layer " + std::to_string(j + 1) + " poling must be +1 or -1");
    }
    layers_.insert(layers_.begin(), Layer{std::move(ambient_in), 0.0, 1});
    layers_.push_back(Layer{std::move(ambient_out), 0.0, 1});
    z_.assign(layers_.size() + 1, 0.0);
    // z_[l] is boundary l; z_[0] unused (kept equal to z_1).
    for (int l = 1; l <= layer_count(); ++l) z_[l + 1] = z_[l] + layers_[l].length;
    z_[0] = z_[1];
  }

  int layer_count() const { return static_cast<int>(layers_.size()) - 2; }
  int media_count() const { return static_cast<int>(layers_.size()); }

  const MaterialModel& medium(int l) const { return layers_.at(l).material; }
  /// Zero for the ambient media.
  double length(int l) const { return layers_.at(l).length; }
  int poling(int l) const { return layers_.at(l).poling; }
  /// Boundary position z_l, l in 1..N+1.
  double z(int l) const { return z_.at(l); }
  /// Reference point of the amplitudes of medium l: its left boundary (z_1 for the input ambient).
  double reference(int l) const { return l == 0 ? z_[1] : z_[l]; }
  double total_length() const { return z_[layer_count() + 1] - z_[1]; }

  const std::vector<Layer>& media() const { return layers_; }

  /// Interior layers only (1..N).
  std::vector<Layer> layers() const { return {layers_.begin() + 1, layers_.end() - 1}; }

  /// Splits interior layer l into two sub-layers of the same material at the given fraction.
  StructureSpec split(int l, double fraction) const {
    if (l < 1 || l > layer_count() || !(fraction > 0.0 && fraction < 1.0))
      throw ConfigError("invalid layer split");
    auto inner = layers();
    Layer a = inner[l - 1], b = inner[l - 1];
    a.length = inner[l - 1].length * fraction;
    b.length = inner[l - 1].length - a.length;
    inner[l - 1] = a;
    inner.insert(inner.begin() + l, b);
    return StructureSpec(medium(0), std::move(inner), medium(layer_count() + 1));
  }

 private:
  std::vector<Layer> layers_;
  std::vector<double> z_;
};

}  // namespace spdc
