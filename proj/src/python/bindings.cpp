#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "mindtrail/error.hpp"
#include "mindtrail/llm.hpp"
#include "mindtrail/metrics.hpp"
#include "mindtrail/mock_provider.hpp"
#include "mindtrail/model.hpp"
#include "mindtrail/serialize.hpp"
#include "mindtrail/service.hpp"
#include "mindtrail/store.hpp"
#include "mindtrail/trace.hpp"
#include "mindtrail/validate.hpp"

namespace py = pybind11;
using namespace mindtrail;

namespace {

// JSON crosses the boundary as text; Python's json module does the rest.
py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }
json from_py(const py::handle& obj) {
    return json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

py::object findings_py(const std::vector<Finding>& findings) {
    json out = json::array();
    for (const auto& f : findings) out.push_back({{"invariant", f.invariant}, {"locator", f.locator}, {"message", f.message}});
    return to_py(out);
}

json usage_json(const metrics::UsageRow& r) {
    json j = json::object();
    const auto values = metrics::row_values(r);
    for (std::size_t i = 0; i < metrics::kColumns.size(); ++i) {
        j[std::string(metrics::kColumns[i])] = static_cast<std::int64_t>(values[i]);
    }
    return j;
}

// In-process session service over the mock provider.
class PyService {
public:
    PyService(std::uint64_t seed, const std::string& storage_dir) {
        std::shared_ptr<Store> store;
        if (storage_dir.empty()) store = std::make_shared<MemoryStore>();
        else store = std::make_shared<FileStore>(storage_dir);
        llm::ProviderConfig cfg;
        cfg.seed = seed;
        auto gw = std::make_shared<llm::Gateway>(cfg, std::make_shared<llm::MockProvider>(seed));
        ServiceOptions opts;
        opts.workers = 1;
        svc_ = std::make_unique<SessionService>(store, gw, std::make_shared<SystemClock>(),
                                                std::make_shared<SeededIds>(seed), opts);
    }
    ~PyService() { svc_->shutdown(); }

    py::object create_session(const std::string& narrative, const std::string& locale) {
        return to_py(svc_->create_session(narrative, locale));
    }
    py::object get_session(const std::string& id) { return to_py(svc_->get_session(id)); }
    py::object suggest_themes(const std::string& id, std::optional<int> n) {
        py::gil_scoped_release nogil;
        auto out = svc_->suggest_themes(id, n);
        py::gil_scoped_acquire gil;
        return to_py(out);
    }
    py::object activate_theme(const std::string& id, const py::dict& suggestion) {
        auto j = from_py(suggestion);
        if (!j.contains("origin")) j["origin"] = "user";
        if (!j.contains("expressions")) j["expressions"] = json::array();
        if (!j.contains("quote")) j["quote"] = "";
        return to_py(svc_->activate_theme(id, j.get<ThemeSuggestion>()));
    }
    py::object suggest_questions(const std::string& id, const std::string& theme_id, std::optional<int> n) {
        return to_py(svc_->suggest_questions(id, theme_id, n, std::nullopt));
    }
    py::object select_question(const std::string& id, const std::string& theme_id, const std::string& text,
                               const std::string& intention) {
        return to_py(svc_->select_question(id, theme_id, {text, intention}));
    }
    py::object update_answer(const std::string& id, const std::string& qid, const std::string& text) {
        return to_py(svc_->update_answer(id, qid, text));
    }
    py::object request_keywords(const std::string& id, const std::string& qid, const std::string& mode) {
        const auto m = parse_keyword_mode(mode);
        if (!m) throw Error(ErrorCode::InvalidRequest, "mode must be initial or more");
        return to_py(svc_->request_keywords(id, qid, *m));
    }
    py::object request_comment(const std::string& id, const std::string& qid) {
        return to_py(svc_->request_comment(id, qid));
    }
    py::object request_summary(const std::string& id) { return to_py(svc_->request_summary(id)); }
    int submit_survey(const std::string& id, const std::string& phase, const std::vector<int>& items) {
        return svc_->submit_survey(id, phase, items);
    }
    py::object export_record(const std::string& id) { return to_py(export_json(svc_->export_record(id))); }
    py::object usage(const std::string& id) { return to_py(usage_json(svc_->usage(id))); }
    void wait_idle() {
        py::gil_scoped_release nogil;
        svc_->wait_idle();
    }

private:
    std::unique_ptr<SessionService> svc_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Reflective-writing session engine";

    static py::exception<Error> error_type(m, "MindtrailError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
            exc.attr("code") = std::string(error_code_name(e.code()));
            PyErr_SetObject(error_type.ptr(), exc.ptr());
        }
    });

    m.def("count_syllables", [](const std::string& s) { return metrics::count_syllables(s); }, py::arg("text"));
    m.def("score_pathways", [](const std::vector<int>& items) { return score_pathways(items); }, py::arg("items"));
    m.def("pathways_delta", [](const std::vector<int>& pre, const std::vector<int>& post) {
        return score_pathways(post) - score_pathways(pre);
    });
    m.def("aggregate", [](const std::vector<double>& values) {
        const auto s = metrics::aggregate(values);
        return py::dict(py::arg("mean") = s.mean, py::arg("sample_sd") = s.sample_sd, py::arg("min") = s.min,
                        py::arg("max") = s.max);
    });
    m.def("phase_timeline", [](const py::list& events) {
        const auto tl = metrics::phase_timeline(from_py(events).get<std::vector<EventRecord>>());
        return to_py(trace::timeline_json(tl));
    });
    m.def("replay", [](const py::dict& script, std::optional<std::uint64_t> seed) {
        const auto r = trace::replay(from_py(script), seed);
        return py::dict(py::arg("session_id") = r.session_id, py::arg("row") = to_py(usage_json(r.row)),
                        py::arg("export") = to_py(export_json(r.record)),
                        py::arg("timeline") = to_py(trace::timeline_json(r.timeline)));
    }, py::arg("script"), py::arg("seed") = py::none());
    m.def("validate_export", [](const std::string& text) { return findings_py(validate_record(parse_export(text))); });

    py::class_<PyService>(m, "Service")
        .def(py::init<std::uint64_t, const std::string&>(), py::arg("seed") = 7, py::arg("storage_dir") = "")
        .def("create_session", &PyService::create_session, py::arg("narrative"), py::arg("locale") = "ko")
        .def("get_session", &PyService::get_session)
        .def("suggest_themes", &PyService::suggest_themes, py::arg("session_id"), py::arg("n") = py::none())
        .def("activate_theme", &PyService::activate_theme)
        .def("suggest_questions", &PyService::suggest_questions, py::arg("session_id"), py::arg("theme_id"),
             py::arg("n") = py::none())
        .def("select_question", &PyService::select_question)
        .def("update_answer", &PyService::update_answer)
        .def("request_keywords", &PyService::request_keywords, py::arg("session_id"), py::arg("question_id"),
             py::arg("mode") = "initial")
        .def("request_comment", &PyService::request_comment)
        .def("request_summary", &PyService::request_summary)
        .def("submit_survey", &PyService::submit_survey)
        .def("export", &PyService::export_record)
        .def("usage", &PyService::usage)
        .def("wait_idle", &PyService::wait_idle);
}
