use lineheat::churn::FileCategory::{self, AdministrativeFile, ProgrammingFile};
use lineheat::classify::Pattern;

pub struct Golden {
    pub path: &'static str,
    pub category: FileCategory,
    pub before: &'static str,
    pub after: &'static str,
    pub expected: Pattern,
}

pub const GOLDEN: &[Golden] = &[
    Golden {
        path: "docs/conf.py",
        category: ProgrammingFile,
        before: r#"release = "3.10.181""#,
        after: r#"release = "3.10.182""#,
        expected: Pattern::PinnedVersionBump,
    },
    Golden {
        path: "requirements.txt",
        category: AdministrativeFile,
        before: "numpy>=1.15,<1.19.0",
        after: "numpy>=1.16.5,<1.19.0",
        expected: Pattern::ConditionalVersionBump,
    },
    Golden {
        path: "cluster/gce/config-default.sh",
        category: ProgrammingFile,
        before: "IMAGE=container-vm-v20141208",
        after: "IMAGE=container-vm-v20150112",
        expected: Pattern::ResourceIdModification,
    },
    Golden {
        path: "ansible/inventory/env/group_vars/all.yml",
        category: AdministrativeFile,
        before: r#"sunbird_user_service_api_base_url: "http://{{sunbird_swarm_manager_lb_ip}}:9000""#,
        after: r#"sunbird_user_service_api_base_url: "http://{{private_ingressgateway_ip}}/learner""#,
        expected: Pattern::ServiceConfiguration,
    },
    Golden {
        path: "drivers/media/video/Makefile",
        category: AdministrativeFile,
        before: "obj-$(CONFIG_VIDEO_DEV) += videodev.o compat_ioctl32.o v4l2-int-device.o",
        after: "obj-$(CONFIG_VIDEO_DEV) += videodev.o v4l2-compat-ioctl32.o v4l2-int-device.o",
        expected: Pattern::DependencySpecification,
    },
    Golden {
        path: "data/formats-data.ts",
        category: ProgrammingFile,
        before: r#"tier: "NU","#,
        after: r#"tier: "PU","#,
        expected: Pattern::ExternalDataFluctuations,
    },
    Golden {
        path: "src/lib/db/project-stats-store.ts",
        category: ProgrammingFile,
        before: "import { IProjectStats } from 'lib/services/project-service';",
        after: "import { IProjectStats } from '../services/project-service';",
        expected: Pattern::PathUpdate,
    },
    Golden {
        path: "zuul.d/jobs.yaml",
        category: AdministrativeFile,
        before: "    name: kolla-ansible-centos8s-source-kvm",
        after: "    name: kolla-ansible-rocky9-source-kvm ",
        expected: Pattern::DistroBump,
    },
    Golden {
        path: "scripts/deploy.sh",
        category: ProgrammingFile,
        before: r#"extra_var_arg+=' -e instance_userdata="" -e launch_wait_time=0'"#,
        after: r#"extra_var_arg+=' -e instance_userdata="" -e launch_wait_time=0 -e elb_pre_post=false'"#,
        expected: Pattern::DebugConfiguration,
    },
    Golden {
        path: "builtin/log.c",
        category: ProgrammingFile,
        before: r#"printf("%s", find_unique_abbrev(get_object_hash(parent->object), abbrev));"#,
        after: r#"printf("%s", find_unique_abbrev(parent->object.oid.hash, abbrev));"#,
        expected: Pattern::FunctionCallChange,
    },
    Golden {
        path: "src/common.c",
        category: ProgrammingFile,
        before: "#include <assert.h>",
        after: "#include  <assert.h>",
        expected: Pattern::FormattingPingPong,
    },
    Golden {
        path: "docs/modules/ROOT/pages/canvas.adoc",
        category: AdministrativeFile,
        before: "On the right side of the canvas is Search, and the Global Menu. You can use Search to easily find components on the",
        after: "On the right side of the canvas  is Search, and the Global Menu. For  more information on search refer to <<search>>. The Global Menu",
        expected: Pattern::LongLineChange,
    },
    Golden {
        path: "cmake/macros/FindMySQL.cmake",
        category: AdministrativeFile,
        before: "# Copyright (C) 2008-2013 TrinityCore <http://www.trinitycore.org/>",
        after: "# Copyright (C) 2008-2014 TrinityCore <http://www.trinitycore.org/>",
        expected: Pattern::LicenseModification,
    },
    Golden {
        path: "data/status.json",
        category: AdministrativeFile,
        before: r#"  "timestamp": "2020-10-03T12:37:57.000+00:00","#,
        after: r#"  "timestamp": "2021-01-25T14:24:58.697Z","#,
        expected: Pattern::MetadataChange,
    },
];
