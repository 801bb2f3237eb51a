#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ctxkit/bookkeeping.hpp"
#include "ctxkit/embedding.hpp"
#include "ctxkit/holonomy.hpp"
#include "ctxkit/intervention.hpp"
#include "ctxkit/nonlocality.hpp"
#include "ctxkit/scenario.hpp"
#include "ctxkit/tradeoff.hpp"

namespace ctxkit::io {

using nlohmann::json;

/// Raised on malformed input files; the message carries the file, the
/// offending field path or byte position, and what was expected.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Scenario + behavior files -------------------------------------------------
json behavior_to_json(const Behavior& b);
Behavior behavior_from_json(const json& j, const std::string& where = "behavior");
Behavior load_behavior(const std::string& path);
void save_behavior(const Behavior& b, const std::string& path);

// Bipartite behavior files ---------------------------------------------------
json bipartite_to_json(const BipartiteBehavior& b);
BipartiteBehavior bipartite_from_json(const json& j, const std::string& where = "bipartite");
BipartiteBehavior load_bipartite(const std::string& path);

// Atlas files -----------------------------------------------------------------
json atlas_to_json(const Atlas& a);
Atlas atlas_from_json(const json& j, const std::string& where = "atlas");
Atlas load_atlas(const std::string& path);

// Intervention model files ----------------------------------------------------
InterventionModel model_from_json(const json& j, const std::string& where = "model");
InterventionModel load_model(const std::string& path);

// Tradeoff config files ---------------------------------------------------------
TradeoffConfig tradeoff_config_from_json(const json& j, const std::string& where = "config");
TradeoffConfig load_tradeoff_config(const std::string& path);

// Report serialization ----------------------------------------------------------
json validation_to_json(const ValidationReport& r);
json disturbance_to_json(const DisturbanceReport& r);
json certificate_to_json(const EmbeddingCertificate& c, const Scenario& s);
json no_signalling_to_json(const NoSignallingReport& r);
json local_decomposition_to_json(const LocalDecomposition& d);
json holonomy_to_json(const HolonomyResult& h);
json flatness_to_json(const FlatnessReport& r);
json bookkeeping_to_json(const BookkeepingReport& r);
json tradeoff_to_json(const TradeoffReport& r);

// Files -------------------------------------------------------------------------
json load_json_file(const std::string& path);
/// Write via a temp file in the same directory, then rename into place.
void save_text_atomic(const std::string& path, const std::string& content);

}  // namespace ctxkit::io
