//! Command implementations. Every command computes all of its outputs
//! before touching the filesystem, then writes each file atomically
//! (temp file + rename), so failures never leave partial outputs behind.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use kprofile::analytics::{
    annotate_tree, broad_shares, composition_stats, diff, gaps, ka_coverage,
};
use kprofile::formats::{
    self, broad_report, broad_shares_of, composition_report, employee_record_from_str, gaps_report,
    ka_coverage_of, ka_report, peek_view, profile_from_str, profile_to_string, report_from_str,
    report_to_string, snapshot_from_str, snapshot_to_string, tree_annotation_of, tree_report,
    BroadBody, KaBody, Report, TreeBody,
};
use kprofile::mapping::{
    load_reference, map_concept_set, normalize, review_queue, Concept, MappingReference,
};
use kprofile::profile::{compose_employee, compose_org, snapshot, EmployeeProfile, Snapshot};
use kprofile::render::{
    output_file_name, render_histogram, render_spider, render_tree, Palette, RenderSpec,
};
use kprofile::taxonomy::{load_taxonomy, Taxonomy};

use crate::config::{self, Settings};
use crate::{Cli, Command, Failure, RenderArgs, ReportView};

pub fn run(cli: &Cli) -> Result<u8, Failure> {
    let settings = config::resolve(cli)?;
    match &cli.command {
        Command::Map { concepts } => cmd_map(&settings, concepts),
        Command::Profile {
            records,
            org,
            as_of,
        } => cmd_profile(&settings, records, org.as_deref(), *as_of),
        Command::Report { view } => cmd_report(&settings, view),
        Command::Render(args) => cmd_render(&settings, args),
        Command::Diff { before, after } => cmd_diff(&settings, before, after),
        Command::Taxonomy => cmd_taxonomy(&settings),
    }
}

// ---------------------------------------------------------------------------
// map
// ---------------------------------------------------------------------------

fn cmd_map(settings: &Settings, concepts_path: &Path) -> Result<u8, Failure> {
    let tax = load_tax(settings)?;
    let reference = load_ref(settings, &tax)?;
    let concepts = read_concepts(concepts_path)?;

    let outcomes = map_concept_set(&concepts, &reference);
    let queue = review_queue(&outcomes);

    let files = vec![
        (
            settings.output_dir.join("mapped.csv"),
            formats::mapped_csv(&outcomes),
        ),
        (
            settings.output_dir.join("review-queue.txt"),
            formats::review_queue_text(&queue),
        ),
    ];
    write_all(&files)?;
    if queue.is_empty() {
        Ok(0)
    } else {
        eprintln!(
            "{} concept(s) did not resolve; see the review queue",
            queue.len()
        );
        Ok(3)
    }
}

/// Read a one-concept-per-row CSV. A first row that is exactly `concept`
/// is treated as a header. Diagnostics carry the offending line number.
fn read_concepts(path: &Path) -> Result<Vec<Concept>, Failure> {
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut concepts = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        let mut fields = record.iter().filter(|f| !f.is_empty());
        match (fields.next(), fields.next()) {
            (Some(first), None) => {
                if line == 1 && first.eq_ignore_ascii_case("concept") {
                    continue;
                }
                let concept = normalize(first).map_err(|e| {
                    Failure::Validation(format!("{} line {line}: {e}", path.display()))
                })?;
                concepts.push(concept);
            }
            (None, _) => continue,
            (Some(_), Some(_)) => {
                return Err(Failure::Validation(format!(
                    "{} line {line}: expected one concept per row",
                    path.display()
                )));
            }
        }
    }
    Ok(concepts)
}

// ---------------------------------------------------------------------------
// profile
// ---------------------------------------------------------------------------

fn cmd_profile(
    settings: &Settings,
    records: &[PathBuf],
    org: Option<&str>,
    as_of: Option<NaiveDate>,
) -> Result<u8, Failure> {
    let tax = load_tax(settings)?;
    let reference = load_ref(settings, &tax)?;

    let mut profiles: Vec<EmployeeProfile> = Vec::new();
    let mut queue: BTreeMap<String, Concept> = BTreeMap::new();
    let mut seen_ids: BTreeSet<String> = BTreeSet::new();
    for path in records {
        let record = employee_record_from_str(&read_text(path)?)
            .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
        if !seen_ids.insert(record.employee_id.clone()) {
            return Err(Failure::Validation(format!(
                "{}: duplicate employee id `{}`",
                path.display(),
                record.employee_id
            )));
        }
        let (profile, unresolved) = compose_employee(
            &record.employee_id,
            &record.sources,
            &reference,
            &tax,
            &settings.policy,
            as_of,
        )?;
        for concept in unresolved {
            queue.entry(concept.norm().to_string()).or_insert(concept);
        }
        if profile.triplets.is_empty() {
            match as_of {
                Some(at) => eprintln!(
                    "warning: profile for `{}` is empty at {at}",
                    profile.employee
                ),
                None => eprintln!("warning: profile for `{}` is empty", profile.employee),
            }
        }
        profiles.push(profile);
    }

    let mut files = Vec::new();
    for profile in &profiles {
        files.push((
            settings.output_dir.join(output_file_name(
                "profile",
                &profile.employee,
                as_of,
                "toml",
            )),
            profile_to_string(profile, tax.version())?,
        ));
    }
    if let Some(org) = org {
        let snap = snapshot(&compose_org(org, &profiles)?, tax.version());
        files.push((
            settings
                .output_dir
                .join(output_file_name("snapshot", org, as_of, "toml")),
            snapshot_to_string(&snap)?,
        ));
    }
    let unresolved: Vec<Concept> = queue.into_values().collect();
    files.push((
        settings.output_dir.join("review-queue.txt"),
        formats::review_queue_text(&unresolved),
    ));

    write_all(&files)?;
    if unresolved.is_empty() {
        Ok(0)
    } else {
        eprintln!(
            "{} concept(s) did not resolve; see the review queue",
            unresolved.len()
        );
        Ok(3)
    }
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

fn cmd_report(settings: &Settings, view: &ReportView) -> Result<u8, Failure> {
    let tax = load_tax(settings)?;
    let files = match view {
        ReportView::Broad { snapshot } => {
            let snap = load_snapshot(&tax, snapshot)?;
            let shares = broad_shares(&snap.profile, &tax);
            let report = broad_report(
                &snap.profile.org,
                tax.version(),
                snap.profile.as_of,
                &shares,
            );
            report_pair(
                settings,
                "broad",
                &snap.profile.org,
                snap.profile.as_of,
                report_to_string(&report)?,
                formats::broad_shares_text(&shares),
            )
        }
        ReportView::Ka { snapshot, depth } => {
            let snap = load_snapshot(&tax, snapshot)?;
            let depth = depth.unwrap_or(settings.depth);
            let rows = ka_coverage(&snap.profile, &tax, depth);
            let report = ka_report(
                &snap.profile.org,
                tax.version(),
                snap.profile.as_of,
                depth,
                &rows,
            );
            report_pair(
                settings,
                "ka",
                &snap.profile.org,
                snap.profile.as_of,
                report_to_string(&report)?,
                formats::ka_coverage_text(&rows),
            )
        }
        ReportView::Gaps { snapshot, depth } => {
            let snap = load_snapshot(&tax, snapshot)?;
            let depth = depth.unwrap_or(settings.depth);
            let gap = gaps(&snap.profile, &tax, depth);
            let report = gaps_report(&snap.profile.org, tax.version(), snap.profile.as_of, &gap);
            report_pair(
                settings,
                "gaps",
                &snap.profile.org,
                snap.profile.as_of,
                report_to_string(&report)?,
                formats::gaps_text(&gap),
            )
        }
        ReportView::Composition { profiles, subject } => {
            let profiles = load_profiles(&tax, profiles)?;
            let as_of = uniform_as_of(&profiles)?;
            let stats = composition_stats(&profiles);
            let report = composition_report(subject, tax.version(), as_of, &stats);
            report_pair(
                settings,
                "composition",
                subject,
                as_of,
                report_to_string(&report)?,
                formats::composition_text(&stats),
            )
        }
        ReportView::Tree {
            profiles,
            ka,
            practiced,
            as_of,
            subject,
        } => {
            let profiles = load_profiles(&tax, profiles)?;
            let at = as_of.unwrap_or_else(today);
            let mut ann = annotate_tree(&profiles, &tax, ka, at)?;
            if !practiced {
                for flags in ann.nodes.values_mut() {
                    flags.covered_practiced = flags.covered_total;
                }
            }
            let area = tax.ka(&ann.ka).expect("annotation names a loaded area");
            let report = tree_report(subject, tax.version(), &ann);
            report_pair(
                settings,
                "tree",
                &format!("{subject} {}", ann.ka),
                Some(at),
                report_to_string(&report)?,
                formats::tree_text(area, &ann),
            )
        }
    };
    write_all(&files)?;
    Ok(0)
}

/// Pair the machine-readable TOML with its plain-text rendering.
fn report_pair(
    settings: &Settings,
    view: &str,
    subject: &str,
    as_of: Option<NaiveDate>,
    toml_text: String,
    plain_text: String,
) -> Vec<(PathBuf, String)> {
    vec![
        (
            settings
                .output_dir
                .join(output_file_name(view, subject, as_of, "toml")),
            toml_text,
        ),
        (
            settings
                .output_dir
                .join(output_file_name(view, subject, as_of, "txt")),
            plain_text,
        ),
    ]
}

fn uniform_as_of(profiles: &[EmployeeProfile]) -> Result<Option<NaiveDate>, Failure> {
    let stamps: BTreeSet<Option<NaiveDate>> = profiles.iter().map(|p| p.as_of).collect();
    if stamps.len() > 1 {
        return Err(Failure::Validation(
            "profiles carry mixed as_of dates; filter all inputs to the same point first"
                .to_string(),
        ));
    }
    Ok(stamps.into_iter().next().flatten())
}

// ---------------------------------------------------------------------------
// render
// ---------------------------------------------------------------------------

fn cmd_render(settings: &Settings, args: &RenderArgs) -> Result<u8, Failure> {
    let text = read_text(&args.report)?;
    let view = peek_view(&text)?;
    let files = match view.as_str() {
        "broad" => {
            let report: Report<BroadBody> = report_from_str(&text, "broad")?;
            let shares = broad_shares_of(&report.body);
            let spec = spec_for(
                args,
                titled("Broad category coverage", &report.subject, report.as_of),
            )?;
            let svg = render_spider(&shares, &spec)?;
            vec![(
                settings.output_dir.join(output_file_name(
                    "spider",
                    &report.subject,
                    report.as_of,
                    "svg",
                )),
                svg,
            )]
        }
        "ka" => {
            let report: Report<KaBody> = report_from_str(&text, "ka")?;
            let rows = ka_coverage_of(&report.body);
            let spec = spec_for(
                args,
                titled("Knowledge-area coverage", &report.subject, report.as_of),
            )?;
            let svg = render_histogram(&rows, &spec)?;
            vec![(
                settings.output_dir.join(output_file_name(
                    "histogram",
                    &report.subject,
                    report.as_of,
                    "svg",
                )),
                svg,
            )]
        }
        "tree" => {
            let report: Report<TreeBody> = report_from_str(&text, "tree")?;
            let tax = load_tax(settings)?;
            if report.taxonomy_version != tax.version().as_str() {
                return Err(Failure::Validation(format!(
                    "report targets taxonomy {}, loaded taxonomy is {}",
                    report.taxonomy_version,
                    tax.version()
                )));
            }
            let ann = tree_annotation_of(&report)?;
            let area = tax.ka(&ann.ka).ok_or_else(|| {
                Failure::Validation(format!(
                    "taxonomy {} has no knowledge area `{}`",
                    tax.version(),
                    ann.ka
                ))
            })?;
            let spec = spec_for(
                args,
                titled(
                    &format!("{} topic coverage", area.code),
                    &report.subject,
                    report.as_of,
                ),
            )?;
            let tree = render_tree(area, &ann, &spec)?;
            let subject = format!("{} {}", report.subject, ann.ka);
            vec![
                (
                    settings.output_dir.join(output_file_name(
                        "tree",
                        &subject,
                        report.as_of,
                        "svg",
                    )),
                    tree.svg,
                ),
                (
                    settings.output_dir.join(output_file_name(
                        "tree",
                        &subject,
                        report.as_of,
                        "dot",
                    )),
                    tree.dot,
                ),
            ]
        }
        other => {
            return Err(Failure::Validation(format!(
                "report view `{other}` has no renderer; render takes broad, ka or tree reports"
            )));
        }
    };
    write_all(&files)?;
    Ok(0)
}

fn titled(what: &str, subject: &str, as_of: Option<NaiveDate>) -> String {
    match as_of {
        Some(at) => format!("{what} — {subject} at {at}"),
        None => format!("{what} — {subject}"),
    }
}

fn spec_for(args: &RenderArgs, default_title: String) -> Result<RenderSpec, Failure> {
    let palette = match &args.palette {
        Some(name) => Palette::named(name).ok_or_else(|| {
            Failure::Validation(format!(
                "unknown palette `{name}`; known palettes: default, mono"
            ))
        })?,
        None => Palette::default(),
    };
    let base = RenderSpec::default();
    Ok(RenderSpec {
        title: args.title.clone().unwrap_or(default_title),
        width: args.width.unwrap_or(base.width),
        height: args.height.unwrap_or(base.height),
        palette,
        prune_uncovered: args.prune,
    })
}

// ---------------------------------------------------------------------------
// diff
// ---------------------------------------------------------------------------

fn cmd_diff(settings: &Settings, before: &Path, after: &Path) -> Result<u8, Failure> {
    let a = snapshot_from_str(&read_text(before)?)
        .map_err(|e| Failure::Validation(format!("{}: {e}", before.display())))?;
    let b = snapshot_from_str(&read_text(after)?)
        .map_err(|e| Failure::Validation(format!("{}: {e}", after.display())))?;
    let d = diff(&a, &b)?;

    let subject = format!("{} {}", a.profile.org, b.profile.org);
    let files = vec![
        (
            settings
                .output_dir
                .join(output_file_name("diff", &subject, None, "toml")),
            formats::diff_to_string(&d, &a.taxonomy_version)?,
        ),
        (
            settings
                .output_dir
                .join(output_file_name("diff", &subject, None, "txt")),
            formats::diff_text(&d),
        ),
    ];
    write_all(&files)?;
    print!("{}", formats::diff_text(&d));
    Ok(if d.is_empty() { 0 } else { 4 })
}

// ---------------------------------------------------------------------------
// taxonomy
// ---------------------------------------------------------------------------

fn cmd_taxonomy(settings: &Settings) -> Result<u8, Failure> {
    let tax = load_tax(settings)?;
    println!(
        "Taxonomy {}: {} knowledge areas across {} broad categories",
        tax.version(),
        tax.ka_count(),
        tax.categories().len()
    );
    for ka in tax.kas() {
        println!(
            "{:<6} {:<55} {:<6} {:>3} topics",
            ka.code,
            ka.name,
            ka.category.as_deref().unwrap_or("-"),
            ka.topics().count()
        );
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// shared plumbing
// ---------------------------------------------------------------------------

fn load_tax(settings: &Settings) -> Result<Taxonomy, Failure> {
    let path = settings
        .taxonomy_dir
        .join(format!("{}.tax", settings.taxonomy_version));
    Ok(load_taxonomy(&settings.taxonomy_version, &path)?)
}

fn load_ref(settings: &Settings, tax: &Taxonomy) -> Result<MappingReference, Failure> {
    let path = settings.reference.as_ref().ok_or_else(|| {
        Failure::Validation(
            "no mapping reference configured; pass --reference or set `reference` in the config"
                .to_string(),
        )
    })?;
    Ok(load_reference(path, tax)?)
}

fn load_snapshot(tax: &Taxonomy, path: &Path) -> Result<Snapshot, Failure> {
    let snap = snapshot_from_str(&read_text(path)?)
        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    if &snap.taxonomy_version != tax.version() {
        return Err(Failure::Validation(format!(
            "{}: snapshot targets taxonomy {}, loaded taxonomy is {}",
            path.display(),
            snap.taxonomy_version,
            tax.version()
        )));
    }
    Ok(snap)
}

fn load_profiles(tax: &Taxonomy, paths: &[PathBuf]) -> Result<Vec<EmployeeProfile>, Failure> {
    let mut out = Vec::new();
    for path in paths {
        let (profile, version) = profile_from_str(&read_text(path)?)
            .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
        if &version != tax.version() {
            return Err(Failure::Validation(format!(
                "{}: profile targets taxonomy {version}, loaded taxonomy is {}",
                path.display(),
                tax.version()
            )));
        }
        out.push(profile);
    }
    Ok(out)
}

fn today() -> NaiveDate {
    chrono::Local::now().date_naive()
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

/// Write every file atomically, creating the target directories first.
fn write_all(files: &[(PathBuf, String)]) -> Result<(), Failure> {
    for (path, text) in files {
        atomic_write(path, text)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn atomic_write(path: &Path, text: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    tmp.write_all(text.as_bytes())
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| Failure::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}
