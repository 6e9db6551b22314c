#ifndef MWLAB_JSON_IO_HPP
#define MWLAB_JSON_IO_HPP

#include <string>

#include "json.hpp"
#include "mwlab/bmo.hpp"
#include "mwlab/convex.hpp"
#include "mwlab/paraproducts.hpp"
#include "mwlab/weights.hpp"

namespace mwlab {

using json = nlohmann::json;

// complex values serialize as [re, im]; matrices as row-major arrays of pairs

json grid_to_json(const Grid& g);
Grid grid_from_json(const json& j);

json field_to_json(const AtomField& f);
AtomField field_from_json(const json& j);

json weight_to_json(const MatrixWeightField& w);
MatrixWeightField weight_from_json(const json& j);

json body_to_json(const ConvexBody& k);
ConvexBody body_from_json(const json& j);

json symbol_to_json(const SymbolSpectrum& b);
// accepts {"grid":...,"d":...,"entries":[...]} or a bare entry list with the
// grid and dimension supplied by the caller
SymbolSpectrum symbol_from_json(const json& j, const Grid* grid = nullptr, int d = 0);

json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);

} // namespace mwlab

#endif
