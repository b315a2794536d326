//! Seeded synthetic KYC corpus: long financial statements and short payslips
//! rendered as text-band page images, with sidecar transcripts and ground
//! truth.
//!
//! Each page is first written as text lines (the sidecar, which the mock OCR
//! engine and the mock VLM treat as the true page content), then rendered as
//! dark word blocks, skewed, optionally turned sideways, blurred and noised.
//! Field values are planted as `Label (year): value` rows on known pages.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use pagewise_core::evaluate::{normalize_value, GroundTruthEntry};
use pagewise_core::ocr::MockNoise;
use pagewise_core::preprocess::{gaussian_denoise, rotate};
use pagewise_core::{DocType, DocumentManifest, Language, PageRecord, RasterImage, ValueType};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{write_ground_truth, CORPUS_SPEC_FILE, DOCS_DIR, GROUND_TRUTH_FILE};
use crate::PipelineError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticCorpusSpec {
    pub doc_count: usize,
    /// Inclusive page-count range of financial statements.
    pub fs_pages: [usize; 2],
    /// Inclusive page-count range of payslips.
    pub payslip_pages: [usize; 2],
    /// Pages are skewed uniformly within ±`max_skew_deg`.
    pub max_skew_deg: f64,
    /// Share of pages scanned sideways (turned 90° clockwise).
    pub sideways_rate: f64,
    /// Share of financial statements carrying look-alike rows (dividends
    /// declared, segment revenue) ahead of the real ones.
    pub distractor_rate: f64,
    /// Share of field labels written in the document language only, without
    /// the English gloss.
    pub local_label_rate: f64,
    /// Noise the mock OCR engine should apply when reading this corpus.
    pub ocr_noise: MockNoise,
    /// Relative document counts per language, by document type.
    pub fs_languages: BTreeMap<Language, u32>,
    pub payslip_languages: BTreeMap<Language, u32>,
    /// Page size in pixels, `[width, height]`.
    pub page_px: [usize; 2],
    pub seed: u64,
}

impl Default for SyntheticCorpusSpec {
    fn default() -> Self {
        use Language::*;
        SyntheticCorpusSpec {
            doc_count: 30,
            fs_pages: [10, 60],
            payslip_pages: [1, 3],
            max_skew_deg: 10.0,
            sideways_rate: 0.2,
            distractor_rate: 0.2,
            local_label_rate: 0.1,
            ocr_noise: MockNoise {
                char_sub_rate: 0.05,
                token_drop_rate: 0.0,
                seed: 0,
                emulate_legibility: true,
            },
            fs_languages: [
                (English, 58),
                (SimplifiedChinese, 11),
                (Indonesian, 7),
                (TraditionalChinese, 5),
            ]
            .into(),
            payslip_languages: [
                (English, 10),
                (SimplifiedChinese, 11),
                (Indonesian, 11),
                (TraditionalChinese, 7),
            ]
            .into(),
            page_px: [600, 800],
            seed: 1,
        }
    }
}

impl SyntheticCorpusSpec {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::Config(format!("corpus spec: {m}")));
        if self.doc_count == 0 {
            return bad("doc_count must be positive");
        }
        for (name, [lo, hi]) in [("fs_pages", self.fs_pages), ("payslip_pages", self.payslip_pages)] {
            if lo == 0 || lo > hi {
                return bad(&format!("{name} must be a non-empty range of positive counts"));
            }
        }
        for (name, v) in [
            ("sideways_rate", self.sideways_rate),
            ("distractor_rate", self.distractor_rate),
            ("local_label_rate", self.local_label_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(&format!("{name} must lie in [0, 1]"));
            }
        }
        if !(0.0..45.0).contains(&self.max_skew_deg) {
            return bad("max_skew_deg must lie in [0, 45)");
        }
        if self.fs_languages.values().sum::<u32>() + self.payslip_languages.values().sum::<u32>() == 0 {
            return bad("language mix is empty");
        }
        if self.page_px[0] < 200 || self.page_px[1] < 200 {
            return bad("pages must be at least 200 px on each side");
        }
        Ok(())
    }
}

/// Splits `total` in proportion to `weights` by largest remainder; ties go to
/// the earlier entry.
pub fn apportion(total: usize, weights: &[u32]) -> Vec<usize> {
    let sum: u64 = weights.iter().map(|&w| u64::from(w)).sum();
    if sum == 0 {
        return vec![0; weights.len()];
    }
    let exact: Vec<(usize, u64)> = weights
        .iter()
        .map(|&w| {
            let num = total as u64 * u64::from(w);
            ((num / sum) as usize, num % sum)
        })
        .collect();
    let mut out: Vec<usize> = exact.iter().map(|e| e.0).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| exact[b].1.cmp(&exact[a].1).then(a.cmp(&b)));
    let short = total - out.iter().sum::<usize>();
    for &i in order.iter().take(short) {
        out[i] += 1;
    }
    out
}

/// What the generator produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub documents: usize,
    pub pages: usize,
    pub ground_truth_items: usize,
}

struct Planted {
    field: &'static str,
    /// Value as printed on the page.
    printed: String,
    year: Option<String>,
    page: usize,
}

struct DocPlan {
    doc_id: String,
    doc_type: DocType,
    language: Language,
    pages: Vec<Vec<String>>,
    planted: Vec<Planted>,
}

/// Writes a corpus for `spec` into `out_dir`:
///
/// ```text
/// out_dir/corpus.json
/// out_dir/ground_truth.jsonl
/// out_dir/docs/<doc_id>/manifest.json
/// out_dir/docs/<doc_id>/page_NNN.png
/// out_dir/docs/<doc_id>/page_NNN.txt
/// ```
///
/// The output depends only on `spec`, so the same seed yields byte-identical
/// files.
pub fn generate_synthetic_corpus(spec: &SyntheticCorpusSpec, out_dir: &Path) -> Result<CorpusSummary, PipelineError> {
    spec.validate()?;
    let docs_dir = out_dir.join(DOCS_DIR);
    fs::create_dir_all(&docs_dir).map_err(|e| PipelineError::io(&docs_dir, e))?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let plans = plan_corpus(spec, &mut rng);
    let mut truth = Vec::new();
    let mut pages = 0;
    for plan in &plans {
        let doc_dir = docs_dir.join(&plan.doc_id);
        fs::create_dir_all(&doc_dir).map_err(|e| PipelineError::io(&doc_dir, e))?;
        let mut records = Vec::new();
        for (i, lines) in plan.pages.iter().enumerate() {
            let text = lines.join("\n") + "\n";
            let stem = format!("page_{i:03}");
            let txt = doc_dir.join(format!("{stem}.txt"));
            fs::write(&txt, text).map_err(|e| PipelineError::io(&txt, e))?;
            let scan = ScanParams::draw(spec, &mut rng);
            let img = render_page(lines, spec.page_px, &scan, rng.random());
            let png = doc_dir.join(format!("{stem}.png"));
            img.save_png(&png)?;
            records.push(PageRecord {
                index: i,
                image_path: png,
                width_px: img.width() as u32,
                height_px: img.height() as u32,
            });
        }
        pages += records.len();
        let manifest = DocumentManifest {
            doc_id: plan.doc_id.clone(),
            doc_type: plan.doc_type,
            language: plan.language,
            pages: records,
            source_path: doc_dir.join("manifest.json"),
        };
        pagewise_core::docmodel::save_manifest(&manifest, &manifest.source_path)?;
        truth.extend(ground_truth_for(plan));
    }

    write_ground_truth(&out_dir.join(GROUND_TRUTH_FILE), &truth)?;
    let spec_path = out_dir.join(CORPUS_SPEC_FILE);
    let spec_json = serde_json::to_string_pretty(spec).expect("spec serializes") + "\n";
    fs::write(&spec_path, spec_json).map_err(|e| PipelineError::io(&spec_path, e))?;
    Ok(CorpusSummary {
        documents: plans.len(),
        pages,
        ground_truth_items: truth.len(),
    })
}

fn ground_truth_for(plan: &DocPlan) -> Vec<GroundTruthEntry> {
    // Multi-year fields are scored on the reporting year, the first row
    // planted for the field.
    let mut out: Vec<GroundTruthEntry> = Vec::new();
    for p in &plan.planted {
        if out.iter().any(|g| g.field == p.field) {
            continue;
        }
        let spec = pagewise_core::docmodel::field_by_name(plan.doc_type, p.field).expect("schema field");
        let canonical = normalize_value(&p.printed, spec.value_type, p.field, plan.language)
            .expect("generator prints parseable values")
            .to_string();
        out.push(GroundTruthEntry {
            doc_id: plan.doc_id.clone(),
            field: p.field.to_string(),
            expected: canonical,
            year: if spec.multi_year { p.year.clone() } else { None },
            pages: vec![p.page],
        });
    }
    let order: Vec<String> = pagewise_core::docmodel::builtin_schema(plan.doc_type)
        .into_iter()
        .map(|f| f.name)
        .collect();
    out.sort_by_key(|g| order.iter().position(|n| *n == g.field));
    debug_assert!(out.iter().all(|g| {
        let vt = pagewise_core::docmodel::field_by_name(plan.doc_type, &g.field)
            .unwrap()
            .value_type;
        vt == ValueType::Text || !g.expected.is_empty()
    }));
    out
}

fn plan_corpus(spec: &SyntheticCorpusSpec, rng: &mut ChaCha8Rng) -> Vec<DocPlan> {
    let fs_weight: u32 = spec.fs_languages.values().sum();
    let ps_weight: u32 = spec.payslip_languages.values().sum();
    let by_type = apportion(spec.doc_count, &[fs_weight, ps_weight]);
    let mut slots: Vec<(DocType, Language)> = Vec::new();
    for (doc_type, n, mix) in [
        (DocType::FinancialStatement, by_type[0], &spec.fs_languages),
        (DocType::Payslip, by_type[1], &spec.payslip_languages),
    ] {
        let langs: Vec<Language> = mix.keys().copied().collect();
        let weights: Vec<u32> = mix.values().copied().collect();
        for (lang, count) in langs.iter().zip(apportion(n, &weights)) {
            slots.extend(std::iter::repeat_n((doc_type, *lang), count));
        }
    }
    slots.shuffle(rng);

    let (mut fs_n, mut ps_n) = (0, 0);
    slots
        .into_iter()
        .map(|(doc_type, language)| {
            let doc_id = match doc_type {
                DocType::FinancialStatement => {
                    fs_n += 1;
                    format!("fs-{fs_n:03}")
                }
                DocType::Payslip => {
                    ps_n += 1;
                    format!("ps-{ps_n:03}")
                }
            };
            match doc_type {
                DocType::FinancialStatement => plan_statement(doc_id, language, spec, rng),
                DocType::Payslip => plan_payslip(doc_id, language, spec, rng),
            }
        })
        .collect()
}

/// Log-uniform integer in `[lo, hi]`: long statements are rarer than short
/// ones, as in real filings.
fn log_uniform(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> usize {
    if lo == hi {
        return lo;
    }
    let x: f64 = rng.random_range((lo as f64).ln()..((hi + 1) as f64).ln());
    (x.exp().floor() as usize).clamp(lo, hi)
}

fn group_digits(n: u64, sep: char) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(sep);
        }
        out.push(c);
    }
    out
}

/// Whole thousands in `[lo, hi)`, so every printed value has a grouped tail.
fn draw_amount(rng: &mut ChaCha8Rng, lo: u64, hi: u64) -> u64 {
    rng.random_range(lo / 1000..hi / 1000) * 1000
}

fn format_amount(v: u64, language: Language) -> String {
    group_digits(v, if language == Language::Indonesian { '.' } else { ',' })
}

fn amount(rng: &mut ChaCha8Rng, lo: u64, hi: u64, language: Language) -> String {
    format_amount(draw_amount(rng, lo, hi), language)
}

/// Label for a field in `language`: English, the local term with an English
/// gloss, or (when `local_only`) the local term alone.
fn label(english: &str, local: Option<&str>, local_only: bool) -> String {
    match local {
        None => english.to_string(),
        Some(l) if local_only => l.to_string(),
        Some(l) => format!("{l} / {english}"),
    }
}

struct Lexicon {
    company: &'static [&'static str],
    currency: &'static [&'static str],
    local: fn(&str) -> Option<&'static str>,
    filler: &'static [&'static str],
}

fn lexicon(language: Language) -> Lexicon {
    match language {
        Language::English => Lexicon {
            company: &[
                "Harbourview Holdings Ltd",
                "Northgate Logistics Pte Ltd",
                "Bluewater Foods Berhad",
                "Kestrel Engineering Limited",
                "Silverline Retail Ltd",
            ],
            currency: &["USD", "SGD", "HKD", "MYR"],
            local: |_| None,
            filler: EN_FILLER,
        },
        Language::Indonesian => Lexicon {
            company: &[
                "PT Maju Jaya Tbk",
                "PT Sinar Abadi Sejahtera",
                "PT Karya Nusantara Tbk",
                "PT Bumi Lestari Makmur",
            ],
            currency: &["IDR"],
            local: id_label,
            filler: ID_FILLER,
        },
        Language::SimplifiedChinese => Lexicon {
            company: &["华达控股有限公司", "东方新材料有限公司", "盛远物流有限公司"],
            currency: &["CNY"],
            local: zh_hans_label,
            filler: ZH_HANS_FILLER,
        },
        Language::TraditionalChinese => Lexicon {
            company: &["華泰實業有限公司", "永昌電子有限公司", "新光食品有限公司"],
            currency: &["TWD"],
            local: zh_hant_label,
            filler: ZH_HANT_FILLER,
        },
    }
}

fn id_label(english: &str) -> Option<&'static str> {
    Some(match english {
        "Company name" => "Nama perusahaan",
        "Reporting currency" => "Mata uang penyajian",
        "Financial year" => "Tahun buku",
        "Sales revenue" => "Pendapatan",
        "Net profit" => "Laba bersih",
        "Total equity" => "Jumlah ekuitas",
        "Dividends paid" => "Dividen dibayar",
        "Currency unit" => "Mata uang",
        "Net pay" => "Gaji bersih",
        "Month" => "Bulan",
        "Year" => "Tahun",
        "Commission" => "Komisi",
        _ => return None,
    })
}

fn zh_hans_label(english: &str) -> Option<&'static str> {
    Some(match english {
        "Company name" => "公司名称",
        "Reporting currency" => "记账本位币货币",
        "Financial year" => "会计年度",
        "Sales revenue" => "营业收入",
        "Net profit" => "净利润",
        "Total equity" => "所有者权益合计",
        "Dividends paid" => "已付股利",
        "Currency unit" => "货币单位",
        "Net pay" => "实发工资",
        "Month" => "工资月份",
        "Year" => "年份",
        "Commission" => "佣金",
        _ => return None,
    })
}

fn zh_hant_label(english: &str) -> Option<&'static str> {
    Some(match english {
        "Company name" => "公司名稱",
        "Reporting currency" => "功能性貨幣",
        "Financial year" => "會計年度",
        "Sales revenue" => "營業收入",
        "Net profit" => "本期淨利",
        "Total equity" => "權益總額",
        "Dividends paid" => "已付股利",
        "Currency unit" => "貨幣單位",
        "Net pay" => "實發薪資",
        "Month" => "薪資月份",
        "Year" => "年份",
        "Commission" => "佣金",
        _ => return None,
    })
}

const EN_FILLER: &[&str] = &[
    "The group manages its capital to ensure entities continue as going concerns",
    "Property plant and equipment are stated at cost less accumulated depreciation",
    "Trade receivables are recognised initially at the amount of consideration",
    "The directors consider the carrying amounts to approximate fair values",
    "Inventories are measured at the lower of cost and net realisable value",
    "Borrowings are subsequently carried at amortised cost",
    "Deferred tax is provided on temporary differences at the reporting date",
    "Leases are recognised as right of use assets with corresponding liabilities",
    "Related party transactions were carried out on normal commercial terms",
    "Impairment of financial assets is assessed on an expected credit loss basis",
    "The company has no contingent liabilities at the end of the period",
    "Key management personnel compensation comprises salaries and benefits",
    "Foreign currency transactions are translated at the exchange rates prevailing",
    "Provisions are recognised when the group has a present obligation",
    "Cash and cash equivalents comprise cash at bank and short term deposits",
    "The board proposes a dividend policy reviewed annually",
    "Revenue recognition follows the transfer of control to customers",
    "Share capital consists of ordinary shares with no par value",
];

const ID_FILLER: &[&str] = &[
    "Perusahaan mengelola modal untuk memastikan kelangsungan usaha",
    "Aset tetap dinyatakan sebesar biaya perolehan dikurangi akumulasi penyusutan",
    "Piutang usaha diakui sebesar nilai wajar imbalan",
    "Persediaan diukur berdasarkan nilai terendah antara biaya dan nilai realisasi",
    "Pinjaman dicatat sebesar biaya perolehan diamortisasi",
    "Pajak tangguhan diakui atas perbedaan temporer pada tanggal pelaporan",
    "Transaksi dengan pihak berelasi dilakukan dengan syarat normal",
    "Kas dan setara kas terdiri dari kas di bank dan deposito jangka pendek",
    "The group manages its capital to ensure entities continue as going concerns",
    "Provisions are recognised when the group has a present obligation",
    "Direksi menelaah kebijakan dividen setiap tahun",
];

const ZH_HANS_FILLER: &[&str] = &[
    "本集团管理资本以确保持续经营能力",
    "固定资产按成本减累计折旧列示",
    "应收账款按交易价格进行初始计量",
    "存货按成本与可变现净值孰低计量",
    "借款按摊余成本进行后续计量",
    "递延所得税按暂时性差异确认",
    "关联方交易按正常商业条款进行",
    "现金及现金等价物包括银行存款",
    "董事会每年审阅股利政策",
];

const ZH_HANT_FILLER: &[&str] = &[
    "本集團管理資本以確保持續經營能力",
    "不動產廠房及設備按成本減累計折舊列示",
    "應收帳款按交易價格進行原始認列",
    "存貨按成本與淨變現價值孰低衡量",
    "借款按攤銷後成本進行後續衡量",
    "遞延所得稅按暫時性差異認列",
    "關係人交易按一般商業條件進行",
    "董事會每年檢討股利政策",
];

const EN_MONTHS: [&str; 12] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];
const ID_MONTHS: [&str; 12] = [
    "Januari",
    "Februari",
    "Maret",
    "April",
    "Mei",
    "Juni",
    "Juli",
    "Agustus",
    "September",
    "Oktober",
    "November",
    "Desember",
];

fn filler_lines(lex: &Lexicon, rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    (0..n)
        .map(|_| lex.filler[rng.random_range(0..lex.filler.len())].to_string())
        .collect()
}

/// Rows an 800 px page holds at the rendering pitch.
const LINES_PER_PAGE: usize = 22;

fn plan_statement(doc_id: String, language: Language, spec: &SyntheticCorpusSpec, rng: &mut ChaCha8Rng) -> DocPlan {
    let lex = lexicon(language);
    let n = log_uniform(rng, spec.fs_pages[0], spec.fs_pages[1]);
    let year: u32 = rng.random_range(2019..=2023);
    let (cur_y, prev_y) = (year.to_string(), (year - 1).to_string());
    let company = lex.company[rng.random_range(0..lex.company.len())].to_string();
    let currency = lex.currency[rng.random_range(0..lex.currency.len())].to_string();
    let distractors = rng.random_bool(spec.distractor_rate);
    let local_only = |rng: &mut ChaCha8Rng| language != Language::English && rng.random_bool(spec.local_label_rate);
    let lbl = |english: &str, only: bool| label(english, (lex.local)(english), only);

    let mut pages: Vec<Vec<String>> = vec![Vec::new(); n];
    let mut planted = Vec::new();

    // Cover page.
    let cover = &mut pages[0];
    cover.push(format!("Annual Report {year}"));
    cover.push("Consolidated financial statements".into());
    cover.push(String::new());
    for (field, english, value) in [
        ("Company Name", "Company name", company.clone()),
        ("Currency", "Reporting currency", currency.clone()),
        ("Year", "Financial year", cur_y.clone()),
    ] {
        let only = local_only(rng);
        cover.push(format!("{}: {value}", lbl(english, only)));
        planted.push(Planted {
            field,
            printed: value,
            year: None,
            page: 0,
        });
    }
    cover.push(String::new());
    cover.extend(filler_lines(&lex, rng, 4));

    // Primary statements on distinct pages in the back three quarters.
    let first = (n / 4).max(1);
    let mut candidates: Vec<usize> = (first..n).collect();
    candidates.shuffle(rng);
    let mut spots: Vec<usize> = candidates.into_iter().take(3).collect();
    while spots.len() < 3 {
        spots.push(n - 1);
    }
    let (pl_page, bs_page, cf_page) = (spots[0], spots[1], spots[2]);

    let statement = |page: usize,
                     heading: String,
                     rows: Vec<(Option<&'static str>, String, u64, u64, bool)>,
                     rng: &mut ChaCha8Rng,
                     planted: &mut Vec<Planted>,
                     pages: &mut Vec<Vec<String>>| {
        let lines = &mut pages[page];
        lines.push(heading);
        lines.push(format!("for the year ended 31 December {year} in {currency}"));
        lines.push(String::new());
        for (field, row_label, lo, hi, localizable) in rows {
            let only = localizable && local_only(rng);
            let text = if localizable {
                lbl(&row_label, only)
            } else {
                row_label.clone()
            };
            for y in [&cur_y, &prev_y] {
                let v = amount(rng, lo, hi, language);
                lines.push(format!("{text} ({y}): {v}"));
                if let Some(f) = field {
                    planted.push(Planted {
                        field: f,
                        printed: v,
                        year: Some(y.clone()),
                        page,
                    });
                }
            }
        }
        lines.push(String::new());
        lines.extend(filler_lines(&lex, rng, 3));
    };

    let mut pl_rows = Vec::new();
    if distractors {
        pl_rows.push((None, "Segment revenue".to_string(), 1_000_000, 500_000_000, false));
    }
    pl_rows.extend([
        (
            Some("Revenue"),
            "Sales revenue".to_string(),
            5_000_000,
            900_000_000,
            true,
        ),
        (None, "Cost of sales".to_string(), 1_000_000, 500_000_000, false),
        (None, "Gross profit".to_string(), 1_000_000, 300_000_000, false),
        (None, "Profit before tax".to_string(), 1_000_000, 200_000_000, false),
        (
            Some("Net Profit"),
            "Net profit".to_string(),
            1_000_000,
            150_000_000,
            true,
        ),
    ]);
    statement(
        pl_page,
        "Statement of profit or loss".into(),
        pl_rows,
        rng,
        &mut planted,
        &mut pages,
    );

    let bs_rows = vec![
        (None, "Total assets".to_string(), 50_000_000, 2_000_000_000, false),
        (None, "Total liabilities".to_string(), 10_000_000, 900_000_000, false),
        (
            Some("Total Equity"),
            "Total equity".to_string(),
            20_000_000,
            1_000_000_000,
            true,
        ),
    ];
    statement(
        bs_page,
        "Statement of financial position".into(),
        bs_rows,
        rng,
        &mut planted,
        &mut pages,
    );

    let mut cf_rows = vec![(
        None,
        "Net cash from operating activities".to_string(),
        1_000_000,
        300_000_000,
        false,
    )];
    if distractors {
        cf_rows.push((None, "Dividends declared".to_string(), 1_000_000, 50_000_000, false));
    }
    cf_rows.extend([
        (
            Some("Dividend"),
            "Dividends paid".to_string(),
            1_000_000,
            50_000_000,
            true,
        ),
        (
            None,
            "Repayment of borrowings".to_string(),
            1_000_000,
            100_000_000,
            false,
        ),
    ]);
    statement(
        cf_page,
        "Statement of cash flows".into(),
        cf_rows,
        rng,
        &mut planted,
        &mut pages,
    );

    // Everything else is narrative notes.
    for (i, lines) in pages.iter_mut().enumerate() {
        if lines.is_empty() {
            lines.push(if i == 1 {
                "Independent auditor's report".to_string()
            } else {
                format!("Notes to the financial statements {i}")
            });
            let k = rng.random_range(10..LINES_PER_PAGE - 1);
            lines.extend(filler_lines(&lex, rng, k));
        }
    }
    DocPlan {
        doc_id,
        doc_type: DocType::FinancialStatement,
        language,
        pages,
        planted,
    }
}

fn plan_payslip(doc_id: String, language: Language, spec: &SyntheticCorpusSpec, rng: &mut ChaCha8Rng) -> DocPlan {
    let lex = lexicon(language);
    let n = rng.random_range(spec.payslip_pages[0]..=spec.payslip_pages[1]);
    let year = rng.random_range(2020..=2024u32).to_string();
    let m = rng.random_range(0..12usize);
    let month = match language {
        Language::English => EN_MONTHS[m].to_string(),
        Language::Indonesian => ID_MONTHS[m].to_string(),
        _ => format!("{}月", m + 1),
    };
    let currency = lex.currency[rng.random_range(0..lex.currency.len())].to_string();
    let (lo, hi) = if language == Language::Indonesian {
        (5_000_000, 60_000_000)
    } else {
        (2_000, 20_000)
    };
    let local_only = |rng: &mut ChaCha8Rng| language != Language::English && rng.random_bool(spec.local_label_rate);
    let lbl = |english: &str, only: bool| label(english, (lex.local)(english), only);

    let mut first = vec![
        match language {
            Language::English => "Payslip".to_string(),
            Language::Indonesian => "Slip Gaji / Payslip".to_string(),
            Language::SimplifiedChinese => "工资单 / Payslip".to_string(),
            Language::TraditionalChinese => "薪資單 / Payslip".to_string(),
        },
        format!("Employer {}", lex.company[rng.random_range(0..lex.company.len())]),
        String::new(),
    ];
    let mut planted = Vec::new();
    let mut row =
        |field: Option<&'static str>, english: &str, value: String, rng: &mut ChaCha8Rng, lines: &mut Vec<String>| {
            let only = field.is_some() && local_only(rng);
            let text = if field.is_some() {
                lbl(english, only)
            } else {
                english.to_string()
            };
            lines.push(format!("{text}: {value}"));
            if let Some(f) = field {
                planted.push(Planted {
                    field: f,
                    printed: value,
                    year: None,
                    page: 0,
                });
            }
        };
    row(Some("Month"), "Month", month, rng, &mut first);
    row(Some("Year"), "Year", year, rng, &mut first);
    row(Some("Currency Unit"), "Currency unit", currency, rng, &mut first);
    first.push(String::new());
    let basic = draw_amount(rng, lo, hi);
    let allowance = draw_amount(rng, lo / 10, hi / 10);
    let commission = draw_amount(rng, lo / 10, hi / 5);
    let gross = basic + allowance + commission;
    let deductions = draw_amount(rng, lo / 10, hi / 10);
    let net = gross - deductions;
    let fmt = |v| format_amount(v, language);
    row(None, "Basic salary", fmt(basic), rng, &mut first);
    row(None, "Allowances", fmt(allowance), rng, &mut first);
    row(Some("Commission"), "Commission", fmt(commission), rng, &mut first);
    row(None, "Gross pay", fmt(gross), rng, &mut first);
    row(None, "Deductions", fmt(deductions), rng, &mut first);
    row(Some("Net Pay"), "Net pay", fmt(net), rng, &mut first);

    let mut pages = vec![first];
    for i in 1..n {
        let mut lines = vec![format!("Payslip notes {i}")];
        if i == 1 {
            let ytd = net * rng.random_range(2..=12);
            lines.push(format!("Year-to-date net pay: {}", fmt(ytd)));
        }
        let n = rng.random_range(4..10);
        lines.extend(filler_lines(&lex, rng, n));
        pages.push(lines);
    }
    DocPlan {
        doc_id,
        doc_type: DocType::Payslip,
        language,
        pages,
        planted,
    }
}

/// Acquisition parameters of one scanned page.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanParams {
    /// Clockwise tilt in degrees.
    pub skew_deg: f64,
    /// Page fed sideways (turned 90° clockwise).
    pub sideways: bool,
    /// Optical blur sigma in pixels.
    pub blur_sigma: f64,
    /// Uniform sensor noise amplitude in gray levels.
    pub noise_amp: i32,
}

impl ScanParams {
    pub const CLEAN: ScanParams = ScanParams {
        skew_deg: 0.0,
        sideways: false,
        blur_sigma: 0.8,
        noise_amp: 5,
    };

    fn draw(spec: &SyntheticCorpusSpec, rng: &mut ChaCha8Rng) -> ScanParams {
        let skew_deg = if spec.max_skew_deg > 0.0 {
            rng.random_range(-spec.max_skew_deg..=spec.max_skew_deg)
        } else {
            0.0
        };
        ScanParams {
            skew_deg,
            sideways: rng.random_bool(spec.sideways_rate),
            ..ScanParams::CLEAN
        }
    }
}

const PAPER: u8 = 245;
const INK: u8 = 30;
const LINE_PITCH: usize = 30;
const GLYPH_H: usize = 12;

/// Renders text lines as word blocks on a `[width, height]` page, then
/// applies the scan model: skew, optional sideways feed, blur and noise.
/// Block widths follow word lengths (CJK characters count double), so the
/// layout mirrors the transcript.
pub fn render_page(lines: &[String], size: [usize; 2], scan: &ScanParams, noise_seed: u64) -> RasterImage {
    let [w, h] = size;
    let mut img = RasterImage::filled(w, h, PAPER);
    let margin_x = w / 10;
    let right = w - margin_x;
    let char_w = (w / 100).max(3);
    let mut y = h / 12;
    for line in lines {
        if y + GLYPH_H >= h - h / 12 {
            break;
        }
        let mut x = margin_x;
        for word in line.split_whitespace() {
            let units: usize = word
                .chars()
                .map(|c| if pagewise_core::retrieval::is_cjk(c) { 2 } else { 1 })
                .sum();
            let ww = units * char_w;
            if x + ww > right {
                break;
            }
            for yy in y..y + GLYPH_H {
                for xx in x..x + ww {
                    img.set(xx, yy, INK);
                }
            }
            x += ww + char_w * 2;
        }
        y += LINE_PITCH;
    }
    let mut page = if scan.skew_deg != 0.0 {
        rotate(&img, scan.skew_deg)
    } else {
        img
    };
    if scan.sideways {
        page = rotate(&page, 90.0);
    }
    if scan.blur_sigma > 0.0 {
        page = gaussian_denoise(&page, scan.blur_sigma);
    }
    add_noise(&page, scan.noise_amp, noise_seed)
}

fn add_noise(img: &RasterImage, amp: i32, seed: u64) -> RasterImage {
    if amp == 0 {
        return img.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let px: Vec<u8> = img
        .pixels()
        .iter()
        .map(|&p| (i32::from(p) + rng.random_range(-amp..=amp)).clamp(0, 255) as u8)
        .collect();
    RasterImage::new(img.width(), img.height(), img.channels(), px).expect("same shape")
}

/// Path of a generated document's manifest.
pub fn manifest_path(corpus_dir: &Path, doc_id: &str) -> PathBuf {
    corpus_dir.join(DOCS_DIR).join(doc_id).join("manifest.json")
}
