//! Unit-test fixture: the documented Sales star schema and three-query
//! workload, in the file formats the CLI consumes. The integration tests
//! embed the same files.

pub fn docs_catalog_json() -> &'static str {
    include_str!("../tests/data/docs_catalog.json")
}

pub fn docs_workload_sql() -> &'static str {
    include_str!("../tests/data/docs_workload.sql")
}

pub const CITY_ID: &str = "Customers.city|Sales.cust_id=Customers.cust_id";
pub const MONTH_ID: &str = "Times.month|Sales.time_id=Times.time_id";
