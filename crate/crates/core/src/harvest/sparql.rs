//! Query-service templates for qualifier census and page-list harvesting.

use crate::error::{Error, Result};
use crate::ids::EntityId;

/// Qualifiers used on statements of `property`, most used first.
pub fn qualifier_census_query(property: EntityId) -> Result<String> {
    let p = property.expect_property()?;
    Ok(format!(
        r#"SELECT ?qual ?qualLabel ?count WHERE {{
  {{
    SELECT ?qual (COUNT(DISTINCT ?item) AS ?count) WHERE {{
      hint:Query hint:optimizer "None" .
      ?item p:{p} ?statement .
      ?statement ?pq_qual ?pq_obj .
      ?qual wikibase:qualifier ?pq_qual .
    }}
    GROUP BY ?qual
  }} .

  OPTIONAL {{
    ?qual rdfs:label ?qualLabel filter (lang(?qualLabel) = "en") .
  }}
}}
ORDER BY DESC(?count) ASC(?qualLabel)
"#
    ))
}

/// (item, English page) pairs for statements of `property` carrying any of
/// `qualifiers`.
pub fn page_list_query(property: EntityId, qualifiers: &[EntityId], limit: usize) -> Result<String> {
    let p = property.expect_property()?;
    if qualifiers.is_empty() {
        return Err(Error::InvalidArgument(
            "page list query needs at least one qualifier".into(),
        ));
    }
    let pq = qualifiers
        .iter()
        .map(|q| q.expect_property().map(|q| format!("pq:{q}")))
        .collect::<Result<Vec<_>>>()?
        .join("|");
    Ok(format!(
        r#"SELECT ?item ?title ?object ?property ?value ?sitelink WHERE {{
  ?item p:{p} ?object.
  ?object ps:{p} ?property;
    {pq} ?value.
  ?sitelink schema:about ?item;
    schema:isPartOf <https://en.wikipedia.org/>;
    schema:name ?title.
  SERVICE wikibase:label {{ bd:serviceParam wikibase:language "en,en". }}
}}
LIMIT {limit}
"#
    ))
}

/// GET URL for `query` against a query-service endpoint, asking for JSON.
pub fn query_url(endpoint: &str, query: &str) -> String {
    let params = url::form_urlencoded::Serializer::new(String::new())
        .append_pair("query", query)
        .append_pair("format", "json")
        .finish();
    format!("{endpoint}?{params}")
}

/// One row of a JSON results document, variable to plain value.
pub type Binding = std::collections::BTreeMap<String, String>;

/// Flattens `results.bindings` of a query-service JSON response.
pub fn parse_bindings(body: &str) -> Result<Vec<Binding>> {
    let doc: serde_json::Value = serde_json::from_str(body)?;
    let rows = doc
        .pointer("/results/bindings")
        .and_then(|b| b.as_array())
        .ok_or_else(|| Error::Payload {
            path: "results.bindings".into(),
            detail: "missing or not an array".into(),
        })?;
    Ok(rows
        .iter()
        .filter_map(|row| row.as_object())
        .map(|row| {
            row.iter()
                .filter_map(|(k, v)| Some((k.clone(), v.get("value")?.as_str()?.to_string())))
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn census_substitutes_property() {
        let q = qualifier_census_query(EntityId::property(54)).unwrap();
        assert!(q.contains("?item p:P54 ?statement ."));
        assert!(q.contains("ORDER BY DESC(?count) ASC(?qualLabel)"));
        assert!(qualifier_census_query(EntityId::item(26)).is_err());
    }

    #[test]
    fn page_list_forms() {
        let q = page_list_query(EntityId::property(54), &[EntityId::property(580)], 100).unwrap();
        assert!(q.contains("    pq:P580 ?value."));
        assert!(q.trim_end().ends_with("LIMIT 100"));
        assert!(page_list_query(EntityId::property(26), &[], 10).is_err());
        assert!(page_list_query(EntityId::property(26), &[EntityId::item(5)], 10).is_err());
    }

    #[test]
    fn url_and_bindings() {
        let u = query_url("https://query.wikidata.org/sparql", "SELECT ?x WHERE {}");
        assert_eq!(
            u,
            "https://query.wikidata.org/sparql?query=SELECT+%3Fx+WHERE+%7B%7D&format=json"
        );
        let body = r#"{"head":{"vars":["qual","count"]},"results":{"bindings":[
            {"qual":{"type":"uri","value":"http://www.wikidata.org/entity/P580"},"count":{"type":"literal","value":"32543"}}]}}"#;
        let rows = parse_bindings(body).unwrap();
        assert_eq!(rows[0]["count"], "32543");
        assert!(parse_bindings("{}").is_err());
    }
}
