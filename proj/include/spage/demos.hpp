#pragma once

#include "spage/llm.hpp"
#include "spage/plan_json.hpp"
#include "spage/sql_emit.hpp"
#include "spage/validator.hpp"

namespace spage {

// Built-in worked examples used as in-context demonstrations for the planner
// and SQL-translator prompts. Three scenarios: a two-table join over pet
// owners, a computed-duration aggregate, and a filtered multi-table join.

inline Catalog demo_pets_catalog() {
    Catalog catalog;
    catalog.add(Table("Has_Pet",
                      Schema({{"ID", ColumnType::Integer}, {"Has_Pet", ColumnType::Text}}),
                      {{Value::integer(1), Value::text("Yes")},
                       {Value::integer(2), Value::text("No")}}));
    catalog.add(Table("Student", Schema({{"ID", ColumnType::Integer}, {"Age", ColumnType::Integer}}),
                      {{Value::integer(1), Value::integer(19)},
                       {Value::integer(2), Value::integer(22)}}));
    return catalog;
}

inline Plan demo_pets_plan() {
    return parse_plan(R"({"steps": [
        {"id": 1, "operation": "Scan", "source": ["Has_Pet"],
         "condition": "Has_Pet = \"Yes\"", "output": ["ID"]},
        {"id": 2, "operation": "Scan", "source": ["Student"],
         "condition": null, "output": ["ID", "Age"]},
        {"id": 3, "operation": "Join", "source": ["Step1", "Step2"],
         "condition": "Step1.ID = Step2.ID", "output": ["Step2.Age"]}
    ]})");
}

inline Catalog demo_projects_catalog() {
    Schema schema({{"ProjectID", ColumnType::Integer},
                   {"ProjectName", ColumnType::Text},
                   {"StartDate", ColumnType::Date},
                   {"EndDate", ColumnType::Date},
                   {"Cost", ColumnType::Real}});
    auto d = [](const char* s) { return Value::date(*Date::parse(s)); };
    Catalog catalog;
    catalog.add(Table("Projects", std::move(schema),
                      {{Value::integer(1), Value::text("Atlas"), d("2021-01-01"),
                        d("2021-01-11"), Value::real(1200.5)},
                       {Value::integer(2), Value::text("Borealis"), d("2021-02-01"),
                        d("2021-02-21"), Value::real(800.0)},
                       {Value::integer(3), Value::text("Cascade"), d("2021-03-05"),
                        d("2021-03-15"), Value::real(1500.0)}}));
    return catalog;
}

inline Plan demo_projects_plan() {
    return parse_plan(R"({"steps": [
        {"id": 1, "operation": "Scan", "source": ["Projects"],
         "condition": null, "output": ["ProjectID", "StartDate", "EndDate"]},
        {"id": 2, "operation": "Aggregate", "source": ["Step1"],
         "condition": null, "output": ["ProjectID", "(EndDate - StartDate) as Duration"]},
        {"id": 3, "operation": "Aggregate", "source": ["Step2"],
         "condition": null, "output": ["AVG(Duration) as Avg_Duration"]}
    ]})");
}

inline Catalog demo_company_catalog() {
    Catalog catalog;
    catalog.add(Table("Employees",
                      Schema({{"EmpID", ColumnType::Integer},
                              {"EmpName", ColumnType::Text},
                              {"Age", ColumnType::Integer},
                              {"DeptID", ColumnType::Integer}}),
                      {{Value::integer(1), Value::text("Ira"), Value::integer(45),
                        Value::integer(10)},
                       {Value::integer(2), Value::text("Joan"), Value::integer(38),
                        Value::integer(20)},
                       {Value::integer(3), Value::text("Kim"), Value::integer(52),
                        Value::integer(10)}}));
    catalog.add(Table("Departments",
                      Schema({{"DeptCode", ColumnType::Integer},
                              {"DeptName", ColumnType::Text},
                              {"Location", ColumnType::Text}}),
                      {{Value::integer(10), Value::text("Research"), Value::text("London")},
                       {Value::integer(20), Value::text("Sales"), Value::text("Paris")}}));
    return catalog;
}

inline Plan demo_company_plan() {
    return parse_plan(R"({"steps": [
        {"id": 1, "operation": "Scan", "source": ["Employees"],
         "condition": "Age > 40", "output": ["EmpID", "EmpName", "DeptID"]},
        {"id": 2, "operation": "Scan", "source": ["Departments"],
         "condition": "Location = \"London\"", "output": ["DeptCode", "Location"]},
        {"id": 3, "operation": "Join", "source": ["Step1", "Step2"],
         "condition": "Step1.DeptID = Step2.DeptCode",
         "output": ["Step1.EmpName", "Step2.Location"]}
    ]})");
}

inline std::vector<PlannerDemo> default_planner_demos() {
    std::vector<PlannerDemo> demos;
    demos.push_back({{"What are the ages of the students who have pets?", demo_pets_catalog(),
                      std::nullopt},
                     demo_pets_plan()});
    demos.push_back({{"What is the average duration of projects?", demo_projects_catalog(),
                      std::nullopt},
                     demo_projects_plan()});
    demos.push_back(
        {{"List names and department locations of employees over 40 located in \"London\".",
          demo_company_catalog(), std::nullopt},
         demo_company_plan()});
    return demos;
}

namespace detail {

inline SqlDemo make_sql_demo(const Plan& plan, const Catalog& catalog, int step_id) {
    ValidationReport report = validate_plan(plan, catalog);
    const Step& step = plan.step_by_id(step_id);
    std::vector<Schema> schemas;
    for (const auto& src : step.source) {
        if (src.kind == SourceRef::Kind::InputTable)
            schemas.push_back(catalog.find(src.table)->schema());
        else schemas.push_back(report.inferred_schemas.at(src.step_id));
    }
    EmitOptions options;
    options.dialect = SqlDialect::SqliteCompat;
    std::string sql = emit_step_sql(step, schemas, options).sql;
    return {step, std::move(schemas), std::move(sql)};
}

}  // namespace detail

inline std::vector<SqlDemo> default_sql_demos() {
    std::vector<SqlDemo> demos;
    demos.push_back(detail::make_sql_demo(demo_pets_plan(), demo_pets_catalog(), 1));
    demos.push_back(detail::make_sql_demo(demo_projects_plan(), demo_projects_catalog(), 2));
    demos.push_back(detail::make_sql_demo(demo_company_plan(), demo_company_catalog(), 3));
    return demos;
}

}  // namespace spage
