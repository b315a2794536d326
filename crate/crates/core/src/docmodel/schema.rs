//! The built-in target field set: seven financial-statement fields and five
//! payslip fields.
//!
//! Keyword, cue and exclusion lists are shipped defaults; deployments extend
//! them through configuration as analyst review surfaces new terminology.

use std::collections::BTreeMap;

use super::{DocType, FieldSpec, Language, ModelError, ValueType};

struct Def {
    name: &'static str,
    value_type: ValueType,
    output_key: &'static str,
    multi_year: bool,
    keywords: &'static [&'static str],
    doc_cues: &'static [&'static str],
    id: &'static [&'static str],
    zh_hans: &'static [&'static str],
    zh_hant: &'static [&'static str],
    exclusions: &'static [&'static str],
}

const FINANCIAL_STATEMENT: &[Def] = &[
    Def {
        name: "Company Name",
        value_type: ValueType::Text,
        output_key: "company_name",
        multi_year: false,
        keywords: &["company", "name", "entity", "reporting"],
        doc_cues: &["financial statements", "annual report", "independent auditor's report"],
        id: &["nama perusahaan", "perseroan"],
        zh_hans: &["公司名称", "有限公司"],
        zh_hant: &["公司名稱", "有限公司"],
        exclusions: &[
            "Auditor or accounting firm name.",
            "Names of subsidiaries or associates.",
        ],
    },
    Def {
        name: "Currency",
        value_type: ValueType::Text,
        output_key: "currency",
        multi_year: false,
        keywords: &["currency", "presentation", "reporting", "expressed"],
        doc_cues: &["financial statements", "basis of preparation"],
        id: &["mata uang", "penyajian"],
        zh_hans: &["货币", "币种", "人民币"],
        zh_hant: &["貨幣", "幣別", "新台幣"],
        exclusions: &["Currencies of individual foreign-currency transactions."],
    },
    Def {
        name: "Dividend",
        value_type: ValueType::Numeric,
        output_key: "dividend",
        multi_year: true,
        keywords: &["dividend", "paid", "financial", "statement"],
        doc_cues: &["statement of cash flows", "statement of changes in equity"],
        id: &["dividen", "dibayar"],
        zh_hans: &["股利", "股息", "已付"],
        zh_hant: &["股利", "股息", "已付"],
        exclusions: &[
            "Dividends declared or approved, but not yet paid.",
            "Dividends received by the company.",
            "Dividend amount per share.",
            "Adjustments for dividend income.",
            "Stock dividends.",
        ],
    },
    Def {
        name: "Total Equity",
        value_type: ValueType::Numeric,
        output_key: "total_equity",
        multi_year: true,
        keywords: &["total", "equity", "shareholders", "balance"],
        doc_cues: &["statement of financial position", "balance sheet"],
        id: &["jumlah ekuitas", "ekuitas"],
        zh_hans: &["所有者权益合计", "股东权益"],
        zh_hant: &["權益總額", "股東權益"],
        exclusions: &[
            "Total liabilities and equity.",
            "Equity attributable to non-controlling interests.",
        ],
    },
    Def {
        name: "Net Profit",
        value_type: ValueType::Numeric,
        output_key: "net_profit",
        multi_year: true,
        keywords: &["net", "profit", "income", "loss"],
        doc_cues: &[
            "statement of profit or loss",
            "income statement",
            "comprehensive income",
        ],
        id: &["laba bersih", "laba tahun berjalan"],
        zh_hans: &["净利润", "本年利润"],
        zh_hant: &["淨利", "本期淨利"],
        exclusions: &[
            "Profit attributable to non-controlling interests.",
            "Profit before tax.",
            "Other comprehensive income.",
        ],
    },
    Def {
        name: "Revenue",
        value_type: ValueType::Numeric,
        output_key: "revenue",
        multi_year: true,
        keywords: &["revenue", "sales", "income", "operating"],
        doc_cues: &["statement of profit or loss", "income statement"],
        id: &["pendapatan", "penjualan"],
        zh_hans: &["营业收入", "收入"],
        zh_hant: &["營業收入", "收入"],
        exclusions: &[
            "Revenue by segment or geographic region.",
            "Other income.",
            "Finance income.",
        ],
    },
    Def {
        name: "Year",
        value_type: ValueType::Numeric,
        output_key: "year",
        multi_year: false,
        keywords: &["year", "ended", "period", "fiscal"],
        doc_cues: &["financial statements", "annual report"],
        id: &["tahun buku", "tahun"],
        zh_hans: &["年度", "截至"],
        zh_hant: &["年度", "截至"],
        exclusions: &["Comparative prior-year figures."],
    },
];

const PAYSLIP: &[Def] = &[
    Def {
        name: "Currency Unit",
        value_type: ValueType::Text,
        output_key: "currency_unit",
        multi_year: false,
        keywords: &["currency", "unit", "amount", "pay"],
        doc_cues: &["payslip", "salary slip", "pay statement"],
        id: &["mata uang", "rupiah"],
        zh_hans: &["币种", "货币单位"],
        zh_hant: &["幣別", "貨幣單位"],
        exclusions: &["Currency of reimbursements paid separately."],
    },
    Def {
        name: "Net Pay",
        value_type: ValueType::Numeric,
        output_key: "net_pay",
        multi_year: false,
        keywords: &["net", "pay", "salary", "take", "home"],
        doc_cues: &["payslip", "salary slip", "pay statement"],
        id: &["gaji bersih", "penerimaan bersih"],
        zh_hans: &["实发工资", "实发金额"],
        zh_hant: &["實發薪資", "實發金額"],
        exclusions: &["Gross pay before deductions.", "Year-to-date totals."],
    },
    Def {
        name: "Month",
        value_type: ValueType::Text,
        output_key: "month",
        multi_year: false,
        keywords: &["month", "period", "pay"],
        doc_cues: &["payslip", "salary slip"],
        id: &["bulan", "periode"],
        zh_hans: &["月份", "工资月份"],
        zh_hant: &["月份", "薪資月份"],
        exclusions: &["Payment date or issue date."],
    },
    Def {
        name: "Year",
        value_type: ValueType::Numeric,
        output_key: "year",
        multi_year: false,
        keywords: &["year", "period", "pay"],
        doc_cues: &["payslip", "salary slip"],
        id: &["tahun"],
        zh_hans: &["年份"],
        zh_hant: &["年份"],
        exclusions: &["Year of employment start."],
    },
    Def {
        name: "Commission",
        value_type: ValueType::Numeric,
        output_key: "commission",
        multi_year: false,
        keywords: &["commission", "incentive", "sales", "earnings"],
        doc_cues: &["payslip", "salary slip", "earnings"],
        id: &["komisi", "insentif"],
        zh_hans: &["佣金", "提成"],
        zh_hant: &["佣金", "獎金"],
        exclusions: &["Year-to-date commission totals.", "Commission rates or percentages."],
    },
];

fn owned(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn build(doc_type: DocType, def: &Def) -> FieldSpec {
    let mut lang_keywords = BTreeMap::new();
    lang_keywords.insert(Language::Indonesian, owned(def.id));
    lang_keywords.insert(Language::SimplifiedChinese, owned(def.zh_hans));
    lang_keywords.insert(Language::TraditionalChinese, owned(def.zh_hant));
    FieldSpec {
        name: def.name.to_string(),
        value_type: def.value_type,
        doc_type,
        keywords: owned(def.keywords),
        doc_cues: owned(def.doc_cues),
        lang_keywords,
        exclusions: owned(def.exclusions),
        output_key: def.output_key.to_string(),
        multi_year: def.multi_year,
    }
}

/// Target fields for `doc_type`, in schema order.
pub fn builtin_schema(doc_type: DocType) -> Vec<FieldSpec> {
    let defs = match doc_type {
        DocType::FinancialStatement => FINANCIAL_STATEMENT,
        DocType::Payslip => PAYSLIP,
    };
    defs.iter().map(|d| build(doc_type, d)).collect()
}

/// [`builtin_schema`] keyed by the doc-type string, for callers holding
/// untrusted input.
pub fn builtin_schema_named(doc_type: &str) -> Result<Vec<FieldSpec>, ModelError> {
    Ok(builtin_schema(doc_type.parse()?))
}

pub fn field_by_name(doc_type: DocType, name: &str) -> Option<FieldSpec> {
    builtin_schema(doc_type).into_iter().find(|f| f.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn financial_statement_fields() {
        let fs = builtin_schema(DocType::FinancialStatement);
        let names: Vec<_> = fs.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "Company Name",
                "Currency",
                "Dividend",
                "Total Equity",
                "Net Profit",
                "Revenue",
                "Year"
            ]
        );
        let dividend = fs.iter().find(|f| f.name == "Dividend").unwrap();
        assert_eq!(dividend.value_type, ValueType::Numeric);
        assert_eq!(fs[0].value_type, ValueType::Text);
        assert_eq!(fs[1].value_type, ValueType::Text);
        assert!(fs[2..].iter().all(|f| f.value_type == ValueType::Numeric));
    }

    #[test]
    fn payslip_fields() {
        let ps = builtin_schema(DocType::Payslip);
        let names: Vec<_> = ps.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, ["Currency Unit", "Net Pay", "Month", "Year", "Commission"]);
        let month = ps.iter().find(|f| f.name == "Month").unwrap();
        assert_eq!(month.value_type, ValueType::Text);
        let types: Vec<_> = ps.iter().map(|f| f.value_type).collect();
        use ValueType::*;
        assert_eq!(types, [Text, Numeric, Text, Numeric, Numeric]);
    }

    #[test]
    fn twelve_fields_total_with_valid_specs() {
        let mut total = 0;
        for dt in DocType::ALL {
            let specs = builtin_schema(dt);
            total += specs.len();
            let names: HashSet<_> = specs.iter().map(|f| f.name.clone()).collect();
            assert_eq!(names.len(), specs.len(), "names unique within {dt}");
            for s in &specs {
                assert!(!s.keywords.is_empty());
                assert!(!s.output_key.is_empty());
                assert_eq!(s.doc_type, dt);
            }
        }
        assert_eq!(total, 12);
        assert_eq!(builtin_schema(DocType::Payslip), builtin_schema(DocType::Payslip));
    }

    #[test]
    fn unknown_doc_type_is_rejected() {
        assert_eq!(
            builtin_schema_named("bank_statement"),
            Err(ModelError::UnknownDocType("bank_statement".into()))
        );
    }
}
