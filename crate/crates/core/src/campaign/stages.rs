use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::store::{read_json, read_json_if_exists, read_jsonl, write_atomic, write_json, write_jsonl};
use super::{parallel, CampaignError, CaseOrigin, CaseRecord, CassetteMode, CharacteristicsFailure, ClassifyRecord, FunctionRecord};
use super::Campaign;
use crate::diff::{classify, compile_suppressions, suppressed, ClassifyPolicy, Discrepancy, ResultsMatrix};
use crate::extract::{compile_patterns, extract_functions, filter_candidates, load_pass_sources};
use crate::pipeline::{
    child_case_id, generate_characteristics, generate_testcase, mutate_one, repair_loop, sample_features, seed_case_id,
    CaseStatus, Characteristics, Exchange, Gate, GateResult, GenContext, Lineage, PipelineError, Retriever, TestCase,
};
use crate::provider::{
    CachedEmbedder, Embedder, HashEmbedder, HttpChatModel, HttpEmbedder, LanguageModel, MeteredModel, RateLimiter,
    RecordingTransport, ReplayTransport, ReqwestTransport, ScriptedModel, Transport,
};
use crate::rag::{chunk_document, index, load_documents, FlatIndex, VectorStore};
use crate::toolchain::{
    compile, compile_jobs, run, run_cells, CompileResult, CompileStatus, Executor, OptLevel, RunResult, TargetConfig,
    ToolchainConfig,
};
use crate::util::derive_seed;

fn missing(field: &str) -> CampaignError {
    CampaignError::Config {
        field: field.to_string(),
        message: "required unless mock providers are selected".into(),
    }
}

/// The compiler configuration that decides whether a case needs repair.
struct CampaignGate<'a> {
    executor: &'a dyn Executor,
    toolchain: &'a ToolchainConfig,
    target: &'a TargetConfig,
    opt_level: OptLevel,
    case_dir: PathBuf,
}

impl Gate for CampaignGate<'_> {
    fn compile(&self, case: &TestCase, attempt: usize) -> Result<GateResult, PipelineError> {
        let dir = self.case_dir.join("gate").join(format!("attempt-{attempt}"));
        let source = dir.join("source.cpp");
        let io = |e: CampaignError| PipelineError::Gate(e.to_string());
        write_atomic(&source, case.source.as_bytes()).map_err(io)?;
        let out = self
            .executor
            .compile(self.toolchain, self.target, self.opt_level, &source, &dir.join("build"))
            .map_err(|e| PipelineError::Gate(e.to_string()))?;
        write_atomic(&dir.join("stderr.txt"), out.stderr.as_bytes()).map_err(io)?;
        let stderr = match out.status {
            CompileStatus::Timeout => format!("{}\nerror: compilation timed out\n", out.stderr),
            _ => out.stderr,
        };
        Ok(GateResult {
            ok: out.status == CompileStatus::Ok,
            stderr,
        })
    }
}

impl Campaign {
    fn transport(&self) -> Result<Arc<dyn Transport>, CampaignError> {
        match &self.config.providers.cassette {
            Some(c) if c.mode == CassetteMode::Replay => Ok(Arc::new(ReplayTransport::load(&self.config.resolve(&c.path))?)),
            Some(c) => {
                let live: Arc<dyn Transport> = Arc::new(ReqwestTransport::new()?);
                Ok(Arc::new(RecordingTransport::new(live, &self.config.resolve(&c.path))?))
            }
            None => Ok(Arc::new(ReqwestTransport::new()?)),
        }
    }

    fn language_model(&self) -> Result<Arc<dyn LanguageModel>, CampaignError> {
        let inner: Arc<dyn LanguageModel> = if self.manifest.mock_providers {
            match &self.config.providers.mock.rules {
                Some(p) => Arc::new(ScriptedModel::load(&self.config.resolve(p))?),
                None => Arc::new(ScriptedModel::new(Vec::new())),
            }
        } else {
            let cfg = self.config.providers.llm.clone().ok_or_else(|| missing("providers.llm"))?;
            let limiter = Arc::new(RateLimiter::new(cfg.requests_per_minute));
            Arc::new(HttpChatModel::new(cfg, self.transport()?, limiter)?)
        };
        Ok(Arc::new(MeteredModel::new(inner, self.ledger.clone())))
    }

    fn embedder(&self) -> Result<Arc<dyn Embedder>, CampaignError> {
        let inner: Arc<dyn Embedder> = if self.manifest.mock_providers {
            let m = &self.config.providers.mock;
            Arc::new(HashEmbedder::new(m.embed_seed, m.embed_dim))
        } else {
            let cfg = self.config.providers.embedding.clone().ok_or_else(|| missing("providers.embedding"))?;
            let limiter = Arc::new(RateLimiter::new(cfg.requests_per_minute));
            Arc::new(HttpEmbedder::new(cfg, self.transport()?, limiter)?)
        };
        let cache = self.layout.embedding_cache();
        if let Some(dir) = cache.parent() {
            std::fs::create_dir_all(dir).map_err(|e| CampaignError::io(dir, e))?;
        }
        Ok(Arc::new(CachedEmbedder::persistent(inner, Some(self.ledger.clone()), &cache)?))
    }

    /// Retrieval over the persisted index, or none when it is empty.
    fn retriever(&self) -> Result<Option<Retriever>, CampaignError> {
        let store = FlatIndex::load(&self.layout.index_dir())?;
        if store.is_empty() {
            return Ok(None);
        }
        Ok(Some(Retriever {
            store,
            embedder: self.embedder()?,
            threshold: self.config.rag.threshold,
            k: self.config.rag.k,
        }))
    }

    pub(super) fn functions(&self, pass_name: &str) -> Result<Vec<FunctionRecord>, CampaignError> {
        read_json(&self.layout.functions(pass_name))
    }

    pub(super) fn extract_stage(&mut self) -> Result<(), CampaignError> {
        let base = self.config.base_dir().to_path_buf();
        for (i, pass) in self.config.passes.iter().enumerate() {
            let sources = load_pass_sources(&pass.pass_name, &pass.sources, &base)?;
            if sources.is_empty() {
                return Err(CampaignError::Config {
                    field: format!("passes[{i}].sources"),
                    message: "matched no files".into(),
                });
            }
            let patterns = compile_patterns(&pass.functions)?;
            let mut records: Vec<FunctionRecord> = Vec::new();
            for source in &sources {
                let all = extract_functions(source)?;
                let kept: Vec<_> = all.into_iter().filter(|f| pass.kinds.contains(&f.kind)).collect();
                let file = source
                    .file_path
                    .strip_prefix(&base)
                    .unwrap_or(&source.file_path)
                    .to_string_lossy()
                    .replace('\\', "/");
                for f in filter_candidates(&kept, pass.min_lines, &patterns) {
                    let function_id = crate::pipeline::function_id(&f);
                    // Identical definitions in two files are one candidate.
                    if records.iter().any(|r| r.function_id == function_id) {
                        continue;
                    }
                    records.push(FunctionRecord {
                        function_id,
                        file: file.clone(),
                        function: f,
                    });
                }
            }
            tracing::info!(pass = pass.pass_name.as_str(), functions = records.len(), "extracted");
            write_json(&self.layout.functions(&pass.pass_name), &records)?;
        }
        Ok(())
    }

    pub(super) fn index_stage(&mut self) -> Result<(), CampaignError> {
        let base = self.config.base_dir().to_path_buf();
        let mut docs = BTreeMap::new();
        for pass in &self.config.passes {
            for doc in load_documents(&pass.docs, &base)? {
                docs.entry(doc.doc_id.clone()).or_insert(doc);
            }
        }
        let mut chunks = Vec::new();
        for doc in docs.values() {
            chunks.extend(chunk_document(&doc.doc_id, &doc.content, self.config.rag.chunk_policy())?);
        }
        let mut store = FlatIndex::new();
        if !chunks.is_empty() {
            let embedder = self.embedder()?;
            let stats = index(&mut store, &chunks, embedder.as_ref())?;
            tracing::info!(documents = docs.len(), chunks = stats.count, dim = stats.dim, "indexed");
        }
        store.save(&self.layout.index_dir())?;
        Ok(())
    }

    pub(super) fn characteristics_stage(&mut self) -> Result<(), CampaignError> {
        let llm = self.language_model()?;
        let retriever = self.retriever()?;
        let ctx = GenContext {
            prompts: &self.prompts,
            llm: llm.as_ref(),
            retriever: retriever.as_ref(),
        };
        let mut todo = Vec::new();
        for pass in &self.config.passes {
            for f in self.functions(&pass.pass_name)? {
                let dir = self.layout.function_dir(&pass.pass_name, &f.function_id);
                if !dir.join("characteristics.json").is_file() && !dir.join("failure.json").is_file() {
                    todo.push((f, dir));
                }
            }
        }
        let results = parallel(self.config.workers.llm, &todo, |(f, dir)| -> Result<(), CampaignError> {
            match generate_characteristics(&f.function, &ctx) {
                Ok((ch, exchange)) => {
                    write_json(&dir.join("exchange.json"), &exchange)?;
                    write_json(&dir.join("characteristics.json"), &ch)
                }
                Err(e) => {
                    tracing::warn!(function = f.function.qualified_name.as_str(), error = %e, "characteristics failed");
                    write_json(
                        &dir.join("failure.json"),
                        &CharacteristicsFailure {
                            function_id: f.function_id.clone(),
                            error: e.to_string(),
                        },
                    )
                }
            }
        });
        results.into_iter().collect()
    }

    pub(super) fn characteristics_of(&self, pass_name: &str, function_id: &str) -> Result<Option<Characteristics>, CampaignError> {
        read_json_if_exists(&self.layout.function_dir(pass_name, function_id).join("characteristics.json"))
    }

    pub(super) fn generate_stage(&mut self) -> Result<(), CampaignError> {
        let llm = self.language_model()?;
        let retriever = self.retriever()?;
        let ctx = GenContext {
            prompts: &self.prompts,
            llm: llm.as_ref(),
            retriever: retriever.as_ref(),
        };
        let gate = self.config.gate();
        let toolchain = self
            .config
            .toolchain
            .compilers
            .iter()
            .find(|c| c.compiler_id == gate.compiler)
            .expect("validated gate compiler");
        let target = toolchain.target(&gate.target).expect("validated gate target");
        self.executor.probe(toolchain)?;
        let mut work = Vec::new();
        for pass in &self.config.passes {
            for f in self.functions(&pass.pass_name)? {
                if let Some(ch) = self.characteristics_of(&pass.pass_name, &f.function_id)? {
                    work.push(ch);
                }
            }
        }
        let results = parallel(self.config.workers.llm, &work, |ch| {
            let gate_for = |case_id: &str| CampaignGate {
                executor: self.executor.as_ref(),
                toolchain,
                target,
                opt_level: gate.opt_level,
                case_dir: self.layout.case_dir(&ch.pass_name, case_id),
            };
            self.generate_for(ch, &ctx, &gate_for)
        });
        results.into_iter().collect()
    }

    fn generate_for<'g>(
        &self,
        ch: &Characteristics,
        ctx: &GenContext<'_>,
        gate_for: &dyn Fn(&str) -> CampaignGate<'g>,
    ) -> Result<(), CampaignError> {
        for i in 0..self.config.selections_per_function {
            let case_id = seed_case_id(&ch.id, i);
            let record = match self.load_case(&ch.pass_name, &case_id)? {
                Some(r) => r,
                None => {
                    self.reset_case_dir(&ch.pass_name, &case_id)?;
                    let seed = derive_seed(self.config.seed, &["selection", &ch.id, &i.to_string()]);
                    let features = sample_features(&self.catalog, seed)?;
                    let drafted = generate_testcase(&case_id, ch, &features, ctx);
                    let placeholder = TestCase {
                        case_id: case_id.clone(),
                        pass_name: ch.pass_name.clone(),
                        source: String::new(),
                        lineage: Lineage {
                            characteristics_id: ch.id.clone(),
                            function_id: ch.function_id.clone(),
                            features,
                            parent: None,
                            transcript: Vec::new(),
                        },
                        status: CaseStatus::Abandoned,
                        abandon_reason: None,
                    };
                    self.finish_case(drafted, placeholder, CaseOrigin::Seed, ctx, &gate_for(&case_id))?
                }
            };
            if !record.compiles() {
                continue;
            }
            for j in 0..self.config.mutations_per_case {
                let child_id = child_case_id(&case_id, j);
                if self.load_case(&ch.pass_name, &child_id)?.is_some() {
                    continue;
                }
                self.reset_case_dir(&ch.pass_name, &child_id)?;
                let drafted = mutate_one(&record.case, j, &self.catalog, self.config.seed, ctx);
                let placeholder = TestCase {
                    case_id: child_id.clone(),
                    pass_name: ch.pass_name.clone(),
                    source: String::new(),
                    lineage: Lineage {
                        characteristics_id: ch.id.clone(),
                        function_id: ch.function_id.clone(),
                        features: sample_features(
                            &self.catalog,
                            crate::pipeline::mutation_seed(self.config.seed, &case_id, j),
                        )?,
                        parent: Some(case_id.clone()),
                        transcript: Vec::new(),
                    },
                    status: CaseStatus::Abandoned,
                    abandon_reason: None,
                };
                self.finish_case(drafted, placeholder, CaseOrigin::Mutation, ctx, &gate_for(&child_id))?;
            }
        }
        Ok(())
    }

    fn load_case(&self, pass_name: &str, case_id: &str) -> Result<Option<CaseRecord>, CampaignError> {
        read_json_if_exists(&self.layout.case_record(pass_name, case_id))
    }

    /// Discard leftovers of a case that was interrupted before its record
    /// was written.
    fn reset_case_dir(&self, pass_name: &str, case_id: &str) -> Result<(), CampaignError> {
        let dir = self.layout.case_dir(pass_name, case_id);
        if dir.exists() {
            std::fs::remove_dir_all(&dir).map_err(|e| CampaignError::io(&dir, e))?;
        }
        Ok(())
    }

    /// Repair a fresh draft (or record why there is none) and persist the
    /// case. The record is written last.
    fn finish_case(
        &self,
        drafted: Result<(TestCase, Exchange), PipelineError>,
        placeholder: TestCase,
        origin: CaseOrigin,
        ctx: &GenContext<'_>,
        gate: &CampaignGate<'_>,
    ) -> Result<CaseRecord, CampaignError> {
        let dir = gate.case_dir.clone();
        let record = match drafted {
            Err(e) => {
                tracing::warn!(case = placeholder.case_id.as_str(), error = %e, "no draft");
                let mut case = placeholder;
                case.abandon_reason = Some(e.to_string());
                CaseRecord {
                    case,
                    origin,
                    generated: false,
                    repair_attempts: 0,
                    fault: Some(e.to_string()),
                }
            }
            Ok((draft, exchange)) => {
                let outcome = repair_loop(draft, gate, ctx, self.config.max_repair_attempts);
                let mut exchanges = vec![exchange];
                exchanges.extend(outcome.exchanges);
                write_jsonl(&dir.join("exchanges.jsonl"), &exchanges)?;
                write_atomic(&dir.join("source.cpp"), outcome.final_case.source.as_bytes())?;
                let fault = outcome.fault.then(|| outcome.final_case.abandon_reason.clone().unwrap_or_default());
                CaseRecord {
                    case: outcome.final_case,
                    origin,
                    generated: true,
                    repair_attempts: outcome.attempts,
                    fault,
                }
            }
        };
        write_json(&dir.join("case.json"), &record)?;
        Ok(record)
    }

    /// Every case record of a pass, ordered by case id.
    pub(super) fn cases(&self, pass_name: &str) -> Result<Vec<CaseRecord>, CampaignError> {
        let dir = self.layout.pass_dir(pass_name);
        let mut out = Vec::new();
        let Ok(entries) = std::fs::read_dir(&dir) else {
            return Ok(out);
        };
        let mut paths: Vec<PathBuf> = entries.flatten().map(|e| e.path().join("case.json")).collect();
        paths.sort();
        for p in paths {
            if p.is_file() {
                out.push(read_json(&p)?);
            }
        }
        Ok(out)
    }

    fn compiled_cases(&self) -> Result<Vec<CaseRecord>, CampaignError> {
        let mut out = Vec::new();
        for pass in &self.config.passes {
            out.extend(self.cases(&pass.pass_name)?.into_iter().filter(|c| c.compiles()));
        }
        Ok(out)
    }

    pub(super) fn compile_stage(&mut self) -> Result<(), CampaignError> {
        let compilers = &self.config.toolchain.compilers;
        for tc in compilers {
            self.executor.probe(tc)?;
        }
        let jobs = compile_jobs(compilers);
        let mut todo = Vec::new();
        for rec in self.compiled_cases()? {
            for job in &jobs {
                let path = self.layout.compile_result(&rec.case.pass_name, &rec.case.case_id, job);
                if !path.is_file() {
                    todo.push((rec.case.pass_name.clone(), rec.case.case_id.clone(), job.clone(), path));
                }
            }
        }
        let results = parallel(self.config.workers.tool, &todo, |(pass, case_id, job, path)| {
            let dir = self.layout.case_dir(pass, case_id);
            let result = compile(
                self.executor.as_ref(),
                case_id,
                job,
                compilers,
                &dir.join("source.cpp"),
                &dir.join("build").join(job.label()),
            )?;
            write_json(path, &result)
        });
        results.into_iter().collect()
    }

    pub(super) fn compile_results(&self, rec: &CaseRecord) -> Result<Vec<CompileResult>, CampaignError> {
        let mut out = Vec::new();
        for job in compile_jobs(&self.config.toolchain.compilers) {
            let path = self.layout.compile_result(&rec.case.pass_name, &rec.case.case_id, &job);
            if let Some(r) = read_json_if_exists(&path)? {
                out.push(r);
            }
        }
        Ok(out)
    }

    pub(super) fn run_results(&self, rec: &CaseRecord) -> Result<Vec<RunResult>, CampaignError> {
        let t = &self.config.toolchain;
        let ok: Vec<_> = self
            .compile_results(rec)?
            .into_iter()
            .filter(|r| r.status == CompileStatus::Ok)
            .map(|r| r.job)
            .collect();
        let mut out = Vec::new();
        for cell in run_cells(&ok, &t.devices, &t.compatibility) {
            let path = self.layout.run_result(&rec.case.pass_name, &rec.case.case_id, &cell);
            if let Some(r) = read_json_if_exists(&path)? {
                out.push(r);
            }
        }
        Ok(out)
    }

    pub(super) fn run_cells_stage(&mut self) -> Result<(), CampaignError> {
        let t = &self.config.toolchain;
        let mut todo = Vec::new();
        for rec in self.compiled_cases()? {
            let compiled: BTreeMap<_, _> = self
                .compile_results(&rec)?
                .into_iter()
                .filter(|r| r.status == CompileStatus::Ok)
                .filter_map(|r| r.binary_path.map(|b| (r.job, b)))
                .collect();
            let jobs: Vec<_> = compiled.keys().cloned().collect();
            for cell in run_cells(&jobs, &t.devices, &t.compatibility) {
                let path = self.layout.run_result(&rec.case.pass_name, &rec.case.case_id, &cell);
                if !path.is_file() {
                    let binary = compiled[&cell.job()].clone();
                    todo.push((rec.case.pass_name.clone(), rec.case.case_id.clone(), cell, binary, path));
                }
            }
        }
        let results = parallel(self.config.workers.tool, &todo, |(pass, case_id, cell, binary, path)| {
            let device = t
                .devices
                .iter()
                .find(|d| d.device_id == cell.device_id)
                .expect("cells come from configured devices");
            let workdir = self.layout.case_dir(pass, case_id).join("runs").join(super::cell_label(cell));
            let result = run(self.executor.as_ref(), case_id, cell, binary, device, &workdir);
            write_json(path, &result)
        });
        results.into_iter().collect()
    }

    pub(super) fn policy(&self) -> Result<ClassifyPolicy, CampaignError> {
        Ok(ClassifyPolicy::new(
            self.config.diff.float_precision,
            &self.config.diff.unsupported_patterns,
            self.config.device_arch(),
        )?)
    }

    pub(super) fn classify_stage(&mut self) -> Result<(), CampaignError> {
        let policy = self.policy()?;
        let suppressions = compile_suppressions(&self.config.diff.ub_suppression)?;
        let cases = self.compiled_cases()?;
        let per_case = parallel(self.config.workers.tool, &cases, |rec| -> Result<Option<Vec<Discrepancy>>, CampaignError> {
            let mut matrix = ResultsMatrix::new(rec.case.case_id.clone());
            matrix.compile_failures = self
                .compile_results(rec)?
                .into_iter()
                .filter(|r| r.status != CompileStatus::Ok)
                .collect();
            for r in self.run_results(rec)? {
                matrix.insert(r);
            }
            if matrix.cells.len() < 2 {
                return Ok(None);
            }
            Ok(Some(classify(&matrix, &policy)?))
        });
        let mut findings = Vec::new();
        let mut record = ClassifyRecord::default();
        for (rec, result) in cases.iter().zip(per_case) {
            let Some(found) = result? else {
                continue;
            };
            record.cases_classified += 1;
            if !found.is_empty() && suppressed(&rec.case.source, &suppressions) {
                record.suppressed.push(rec.case.case_id.clone());
                continue;
            }
            findings.extend(found);
        }
        write_jsonl(&self.layout.findings(), &findings)?;
        write_json(&self.layout.classify(), &record)
    }

    pub(super) fn findings(&self) -> Result<Vec<Discrepancy>, CampaignError> {
        read_jsonl(&self.layout.findings())
    }

    pub(super) fn function_failures(&self, pass_name: &str) -> Result<usize, CampaignError> {
        let mut n = 0;
        for f in self.functions(pass_name)? {
            let dir: &Path = &self.layout.function_dir(pass_name, &f.function_id);
            if dir.join("failure.json").is_file() {
                n += 1;
            }
        }
        Ok(n)
    }
}
