#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ir_agent/agents/pipeline.hpp"
#include "ir_agent/error.hpp"
#include "ir_agent/eval/harness.hpp"
#include "ir_agent/peaks.hpp"
#include "ir_agent/retriever.hpp"
#include "ir_agent/smiles.hpp"
#include "ir_agent/spectrum.hpp"
#include "ir_agent/spectrum_io.hpp"
#include "ir_agent/translator/checkpoint.hpp"
#include "ir_agent/translator/generator.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace ir_agent;
using nlohmann::json;

namespace {

std::vector<Spectrum> load_absorbance(const fs::path& path) {
  std::vector<Spectrum> out;
  for (auto& s : load_spectra(path)) {
    out.push_back(s.mode() == IntensityMode::kTransmittance ? to_absorbance(s) : std::move(s));
  }
  return out;
}

std::vector<double> to_vector(std::span<const double> v) { return {v.begin(), v.end()}; }

/// Structured results cross the boundary as JSON text; the Python side decodes them.
std::string elucidate_json(const fs::path& input, const fs::path& db_path, const fs::path& table_path,
                           const std::string& config_json, const std::optional<fs::path>& checkpoint) {
  auto config = agents::pipeline_config_from_json(json::parse(config_json));
  const auto spectra = load_absorbance(input);
  const auto db = std::make_shared<const SpectraDatabase>(load_absorbance(db_path));
  const auto table = load_table(table_path);
  std::unique_ptr<translator::CandidateGenerator> generator;
  if (checkpoint) {
    generator = std::make_unique<translator::NeuralGenerator>(
        std::make_shared<const translator::TranslatorModel>(translator::load_checkpoint(*checkpoint)),
        config.beam_width);
  } else {
    generator = std::make_unique<translator::RetrievalGenerator>(db, config.exclude_self);
  }
  std::unique_ptr<agents::LlmBackend> backend;
  if (config.mode != agents::AblationMode::kNoExperts) backend = agents::make_backend(config);
  const agents::PipelineResources resources{generator.get(), db.get(), table, backend.get()};
  json results = json::array();
  {
    py::gil_scoped_release release;
    for (const auto& s : spectra) results.push_back(agents::result_to_json(agents::elucidate(config, resources, s)));
  }
  return results.dump();
}

}  // namespace

PYBIND11_MODULE(_ir_agent, m) {
  m.doc() = "Infrared spectrum to molecular structure toolkit";

  static py::exception<Error> base(m, "IrAgentError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string message = std::string(category_name(e.category())) + ": " + e.what();
      base(message.c_str());
    }
  });

  py::class_<Spectrum>(m, "Spectrum")
      .def(py::init([](double start, double end, std::vector<double> values, const std::string& mode,
                       const std::string& id, std::optional<std::string> smiles) {
             const WavenumberGrid grid(start, end, values.size());
             return Spectrum(grid, std::move(values), parse_mode(mode), id, std::move(smiles));
           }),
           py::arg("start"), py::arg("end"), py::arg("values"), py::arg("mode") = "absorbance",
           py::arg("id") = "", py::arg("smiles") = std::nullopt)
      .def_property_readonly("id", &Spectrum::id)
      .def_property_readonly("smiles", &Spectrum::smiles)
      .def_property_readonly("mode", [](const Spectrum& s) { return std::string(mode_name(s.mode())); })
      .def_property_readonly("values", [](const Spectrum& s) { return to_vector(s.values()); })
      .def_property_readonly("wavenumbers", [](const Spectrum& s) {
        std::vector<double> w(s.grid().count());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = s.grid().point(i);
        return w;
      })
      .def("__repr__", [](const Spectrum& s) {
        return "<Spectrum id='" + s.id() + "' " + std::string(mode_name(s.mode())) + " " +
               std::to_string(s.grid().count()) + " points>";
      });

  m.def("load_spectra", [](const fs::path& p) { return load_spectra(p); }, py::arg("path"));
  m.def("save_spectra", &save_spectra, py::arg("path"), py::arg("spectra"));
  m.def("to_absorbance", [](const Spectrum& s) { return to_absorbance(s); }, py::arg("spectrum"));
  m.def("absorbance", [](const std::vector<double>& t) {
        const WavenumberGrid grid(0.0, 1.0, std::max<std::size_t>(t.size(), 2));
        if (t.size() < 2) throw DomainError("need at least two samples");
        return to_vector(to_absorbance(Spectrum(grid, t, IntensityMode::kTransmittance)).values());
      }, py::arg("transmittance"));

  m.def("find_peak_indices",
        [](const std::vector<double>& values, double height, std::size_t distance) {
          return find_peak_indices(values, {height, distance});
        },
        py::arg("values"), py::arg("height") = 1.0, py::arg("distance") = 50);
  m.def("assign_peaks",
        [](const Spectrum& s, const fs::path& table, double height, std::size_t distance) {
          return assignments_to_json(assign(find_peaks(s, {height, distance}), load_table(table))).dump();
        },
        py::arg("spectrum"), py::arg("table"), py::arg("height") = 1.0, py::arg("distance") = 50);

  m.def("retrieve",
        [](const std::vector<Spectrum>& database, const Spectrum& query, std::size_t top_n, bool exclude_self) {
          const SpectraDatabase db(database);
          const auto view = exclude_self ? ir_agent::exclude_self(db, query.id()) : DatabaseView(db);
          return hits_to_json(retrieve(view, query, {.top_n = top_n})).dump();
        },
        py::arg("database"), py::arg("query"), py::arg("top_n") = 10, py::arg("exclude_self") = false);

  m.def("canonicalize", [](const std::string& s) { return smiles::canonicalize(smiles::parse(s)).text; },
        py::arg("smiles"));
  m.def("compare",
        [](const std::string& a, const std::string& b) {
          const auto c = smiles::compare(a, b);
          return py::dict(py::arg("equivalent") = c.equivalent,
                          py::arg("aromatic_normalized_equivalent") = c.aromatic_normalized_equivalent,
                          py::arg("parse_failure") = c.parse_failure,
                          py::arg("stereo_discarded") = c.stereo_discarded);
        },
        py::arg("a"), py::arg("b"));

  m.def("prompt_digest", &agents::prompt_digest, py::arg("system"), py::arg("user"));
  m.def("elucidate_json", &elucidate_json, py::arg("input"), py::arg("database"), py::arg("table"),
        py::arg("config_json") = "{}", py::arg("checkpoint") = std::nullopt);

  m.def("evaluate",
        [](const fs::path& spec_path, const fs::path& out_dir) {
          const auto spec = eval::load_experiment(spec_path);
          std::vector<eval::RunReport> reports;
          {
            py::gil_scoped_release release;
            reports = eval::run_experiment(spec);
          }
          eval::emit_report(reports, out_dir);
          return eval::render_csv(reports);
        },
        py::arg("spec"), py::arg("out_dir"));
}
