#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ned/attractor.hpp"
#include "ned/certificate.hpp"
#include "ned/dichotomy.hpp"
#include "ned/gallery.hpp"
#include "ned/process.hpp"
#include "ned/robustness.hpp"

namespace ned {

using Json = nlohmann::ordered_json;

Json to_json(const DichotomyCertificate& c);
// Explicit projections need a family; pass the one that belongs to the process.
DichotomyCertificate certificate_from_json(const Json& j,
                                           std::shared_ptr<const ProjectionFamily> family = {});

Json to_json(const RobustnessReport& r);
Json to_json(const SupResult& r);
Json to_json(const PipelineResult& r);
Json to_json(const CheckReport& r);
Json to_json(const RejectionSeries& r);
Json to_json(const Classification& c);
Json to_json(const DichotomyClaim& c);

void write_frontier_csv(std::ostream& os, const ParetoFrontier& f);
void write_norm_grid_csv(std::ostream& os, const NormGrid& g);
// One row per kept trajectory end point: t,x1..xn,cluster_id.
void write_cloud_csv(std::ostream& os, const std::vector<OmegaResult>& sections);
void write_envelope_csv(std::ostream& os, const RadiusEnvelope& e, const std::vector<double>& times);

struct LoadedProcess {
    EvolutionProcess process;
    // Family the process was built with (planted modes), if any.
    std::shared_ptr<const ProjectionFamily> family;
    std::shared_ptr<const GalleryEntry> gallery;
};

// {"backend": ..., "dimension": n, "domain": ..., backend fields}. Backends:
//   closed-form            {"gallery": name, "params": {...}}
//   piecewise-closed-form  {"breaks", "generators"} or {"breaks", "V", "rates", "unstable"}
//   integrated             {"A": constant matrix} or {"gallery": "smooth_limits", "params"}
//   discretized-pde        {"N", "L", "bc", "robin_alpha", "a": named coefficient, "dt"}
LoadedProcess process_from_json(const Json& j);

// Named scalar coefficient g(t): constant, barreira, sign_switch.
struct NamedCoefficient {
    std::function<double(double)> g;
    std::function<double(double, double)> integral;  // int_s^t g
};
NamedCoefficient coefficient_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
void write_json_file(const std::string& path, const Json& j);
// <out>.meta.json carrying the wall-clock timestamp, kept apart so reports stay reproducible.
void write_meta_sidecar(const std::string& out, const Json& extra = Json::object());

}  // namespace ned
